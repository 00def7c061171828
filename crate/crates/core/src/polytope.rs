//! The no-signalling polytope in equality form.
//!
//! Positivity of every table entry is implicit: an [`HPolytope`] stores only
//! its equality rows, and every coordinate is constrained to be nonnegative.

use num_traits::{Signed, Zero};

use crate::boxes::CorrBox;
use crate::error::{Error, Result};
use crate::linalg;
use crate::rational::{self, Rational};
use crate::shape::{BoxShape, MixedRadix};

/// `coeffs · p = rhs`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EqualityRow {
    pub coeffs: Vec<Rational>,
    pub rhs: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HPolytope {
    pub shape: BoxShape,
    pub equalities: Vec<EqualityRow>,
}

impl HPolytope {
    pub fn ambient_dimension(&self) -> usize {
        self.shape.table_len()
    }

    /// Number of positivity rows, one per table entry.
    pub fn positivity_rows(&self) -> usize {
        self.shape.table_len()
    }

    pub fn equality_rank(&self) -> usize {
        let rows: Vec<Vec<Rational>> = self.equalities.iter().map(|r| r.coeffs.clone()).collect();
        linalg::rank(&rows)
    }

    /// Affine dimension, assuming the polytope is nonempty.
    pub fn dimension(&self) -> usize {
        self.ambient_dimension() - self.equality_rank()
    }

    pub fn contains(&self, point: &[Rational]) -> bool {
        point.len() == self.ambient_dimension()
            && point.iter().all(|v| !v.is_negative())
            && self.equalities.iter().all(|row| {
                let s: Rational = row.coeffs.iter().zip(point).map(|(c, p)| c * p).sum();
                s == row.rhs
            })
    }

    /// A point is a vertex iff it is the unique solution of the equalities
    /// with its zero coordinates pinned, i.e. the equality columns on its
    /// support are linearly independent.
    pub fn is_vertex(&self, point: &[Rational]) -> Result<bool> {
        if !self.contains(point) {
            return Err(Error::InvalidBox {
                count: 1,
                first: "point is not in the polytope".into(),
            });
        }
        let support: Vec<usize> = (0..point.len()).filter(|&i| !point[i].is_zero()).collect();
        let columns: Vec<Vec<Rational>> = support
            .iter()
            .map(|&i| self.equalities.iter().map(|r| r.coeffs[i].clone()).collect())
            .collect();
        Ok(linalg::rank(&columns) == support.len())
    }

    pub fn push(&mut self, coeffs: Vec<Rational>, rhs: Rational) {
        self.equalities.push(EqualityRow { coeffs, rhs });
    }
}

/// Normalization per joint input plus, for every party, equality of the
/// marginal of the remaining parties across that party's inputs.
pub fn build_hrep(shape: &BoxShape) -> HPolytope {
    let n = shape.table_len();
    let mut h = HPolytope {
        shape: shape.clone(),
        equalities: Vec::new(),
    };
    for j in 0..shape.joint_inputs() {
        let mut row = vec![rational::zero(); n];
        let off = shape.block_offset(j);
        for v in &mut row[off..off + shape.block_len(j)] {
            *v = rational::one();
        }
        h.push(row, rational::one());
    }
    for row in no_signalling_rows(shape) {
        h.push(row, rational::zero());
    }
    h
}

/// Homogeneous rows: for party `k`, inputs `0` and `x ≥ 1`, and each fixed
/// outputs/inputs of the others, `Σ_a p(·|x) − Σ_a p(·|0) = 0`.
pub fn no_signalling_rows(shape: &BoxShape) -> Vec<Vec<Rational>> {
    let n = shape.table_len();
    let parties = shape.parties();
    let mut rows = Vec::new();
    for party in 0..parties {
        let others: Vec<usize> = (0..parties).filter(|&k| k != party).collect();
        for xo in MixedRadix::new(others.iter().map(|&k| shape.inputs(k)).collect()) {
            let radices: Vec<usize> = others
                .iter()
                .zip(&xo)
                .map(|(&k, &x)| shape.outputs(k, x))
                .collect();
            for ao in MixedRadix::new(radices) {
                let mut inputs = vec![0; parties];
                let mut outputs = vec![0; parties];
                for (i, &k) in others.iter().enumerate() {
                    inputs[k] = xo[i];
                    outputs[k] = ao[i];
                }
                for xk in 1..shape.inputs(party) {
                    let mut row = vec![rational::zero(); n];
                    for (x, sign) in [(xk, 1), (0, -1)] {
                        inputs[party] = x;
                        for a in 0..shape.outputs(party, x) {
                            outputs[party] = a;
                            row[shape.index(&outputs, &inputs)] += rational::int(sign);
                        }
                    }
                    rows.push(row);
                }
            }
        }
    }
    rows
}

/// Affine dimension of the no-signalling polytope of `shape`.
pub fn dimension(shape: &BoxShape) -> usize {
    build_hrep(shape).dimension()
}

/// Closed form for two parties with two inputs each:
/// `Σ_{x,y} dA(x) dB(y) − Σ_x dA(x) − Σ_y dB(y)`.
pub fn bipartite_two_input_dimension(a_outputs: [usize; 2], b_outputs: [usize; 2]) -> usize {
    let table: usize = a_outputs
        .iter()
        .flat_map(|&da| b_outputs.iter().map(move |&db| da * db))
        .sum();
    table - a_outputs.iter().sum::<usize>() - b_outputs.iter().sum::<usize>()
}

/// Whether `b` is a vertex of the no-signalling polytope of its shape.
pub fn is_extremal(b: &CorrBox) -> Result<bool> {
    b.ensure_valid()?;
    build_hrep(b.shape()).is_vertex(b.table())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families;

    #[test]
    fn hrep_sizes() {
        let h = build_hrep(&BoxShape::uniform(2, 2, 2).unwrap());
        assert_eq!(h.positivity_rows(), 16);
        assert_eq!(h.equality_rank(), 8);
        let h3 = build_hrep(&BoxShape::uniform(3, 2, 2).unwrap());
        assert_eq!(h3.positivity_rows(), 64);
        assert_eq!(h3.equality_rank(), 38);
        let simplex = build_hrep(&BoxShape::uniform(1, 1, 4).unwrap());
        assert_eq!(simplex.equality_rank(), 1);
    }

    #[test]
    fn dimensions() {
        assert_eq!(dimension(&BoxShape::uniform(2, 2, 2).unwrap()), 8);
        assert_eq!(dimension(&BoxShape::uniform(2, 2, 3).unwrap()), 24);
        assert_eq!(dimension(&BoxShape::uniform(3, 2, 2).unwrap()), 26);
        for (da, db) in [([2, 3], [3, 2]), ([2, 2], [3, 3]), ([4, 1], [2, 3])] {
            let s = BoxShape::bipartite(da.to_vec(), db.to_vec()).unwrap();
            assert_eq!(dimension(&s), bipartite_two_input_dimension(da, db));
        }
        for d in 2..=4 {
            assert_eq!(dimension(&BoxShape::uniform(2, 2, d).unwrap()), 4 * d * (d - 1));
        }
    }

    #[test]
    fn named_boxes_satisfy_the_rows() {
        for b in families::all_pr().iter().chain(&families::all_local_deterministic()) {
            assert!(build_hrep(b.shape()).contains(b.table()));
        }
    }

    #[test]
    fn extremality() {
        assert!(is_extremal(&families::pr(0, 0, 0).unwrap()).unwrap());
        assert!(is_extremal(&families::d_box(3).unwrap()).unwrap());
        let mid = CorrBox::mixture(&[
            (rational::ratio(1, 2), &families::local_deterministic(0, 0, 0, 0).unwrap()),
            (rational::ratio(1, 2), &families::local_deterministic(0, 1, 0, 0).unwrap()),
        ])
        .unwrap();
        assert!(!is_extremal(&mid).unwrap());
        assert!(!is_extremal(&CorrBox::uniform(&BoxShape::uniform(2, 2, 2).unwrap())).unwrap());
    }

    #[test]
    fn extremality_rejects_invalid_boxes() {
        let s = BoxShape::uniform(1, 1, 2).unwrap();
        let b = CorrBox::new(s, vec![rational::ratio(1, 2), rational::ratio(1, 4)]).unwrap();
        assert!(is_extremal(&b).is_err());
    }
}
