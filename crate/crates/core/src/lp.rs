//! Exact simplex for `max c·z  s.t.  A z = b, z ≥ 0`.
//!
//! Revised simplex over rationals with an explicit basis inverse. Phase I
//! uses one artificial variable per row. Entering columns follow the
//! largest reduced cost, switching to Bland's rule during runs of
//! degenerate pivots, which rules out cycling. The optimal dual vector is
//! `c_Bᵀ B⁻¹`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::rational::Rational;

/// Consecutive degenerate pivots tolerated before Bland's rule takes over.
const DEGENERATE_RUN: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LpOutcome {
    Optimal {
        x: Vec<Rational>,
        value: Rational,
        /// `y` with `yᵀA ≥ cᵀ` and `yᵀb = value`.
        dual: Vec<Rational>,
    },
    Infeasible,
    Unbounded,
}

/// Column `j` of `A` as `(row, value)` pairs.
pub type SparseColumn = Vec<(usize, Rational)>;

struct Revised<'a> {
    m: usize,
    cols: &'a [SparseColumn],
    /// Integer copies of integral columns, signs of flipped rows applied.
    int_cols: Vec<Option<Vec<(usize, BigInt)>>>,
    sign: Vec<bool>,
    binv: Vec<Vec<Rational>>,
    basis: Vec<usize>, // index >= cols.len() is the artificial of that row
    xb: Vec<Rational>,
}

impl<'a> Revised<'a> {
    fn n(&self) -> usize {
        self.cols.len()
    }

    /// `B⁻¹ A_j` for the row-flipped system.
    fn column(&self, j: usize) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); self.m];
        if j >= self.n() {
            let i = j - self.n();
            for r in 0..self.m {
                out[r] = self.binv[r][i].clone();
            }
            return out;
        }
        for (i, v) in &self.cols[j] {
            let v = if self.sign[*i] { -v } else { v.clone() };
            for r in 0..self.m {
                if !self.binv[r][*i].is_zero() {
                    out[r] += &self.binv[r][*i] * &v;
                }
            }
        }
        out
    }

    fn dot_column(&self, y: &[Rational], j: usize) -> Rational {
        self.cols[j]
            .iter()
            .filter(|(i, _)| !y[*i].is_zero())
            .map(|(i, v)| {
                let p = &y[*i] * v;
                if self.sign[*i] {
                    -p
                } else {
                    p
                }
            })
            .sum()
    }

    /// `c_Bᵀ B⁻¹` for the row-flipped system.
    fn duals(&self, cost: &dyn Fn(usize) -> Rational) -> Vec<Rational> {
        let mut y = vec![Rational::zero(); self.m];
        for r in 0..self.m {
            let cb = cost(self.basis[r]);
            if cb.is_zero() {
                continue;
            }
            for (i, yi) in y.iter_mut().enumerate() {
                if !self.binv[r][i].is_zero() {
                    *yi += &cb * &self.binv[r][i];
                }
            }
        }
        y
    }

    fn pivot(&mut self, r: usize, q: usize, alpha: &[Rational]) {
        let p = alpha[r].clone();
        for v in self.binv[r].iter_mut() {
            if !v.is_zero() {
                *v /= &p;
            }
        }
        self.xb[r] /= &p;
        let (prow, px) = (self.binv[r].clone(), self.xb[r].clone());
        for i in 0..self.m {
            if i == r || alpha[i].is_zero() {
                continue;
            }
            for (v, pv) in self.binv[i].iter_mut().zip(&prow) {
                if !pv.is_zero() {
                    *v -= &alpha[i] * pv;
                }
            }
            self.xb[i] -= &alpha[i] * &px;
        }
        self.basis[r] = q;
    }

    /// Maximizes `cost` over structural entering columns. Returns false if
    /// unbounded.
    fn optimize(&mut self, cost: &dyn Fn(usize) -> Rational) -> bool {
        let mut degenerate = 0usize;
        loop {
            let y = self.duals(cost);
            // Price with y scaled to integers; reduced costs then share the
            // positive denominator `scale` and compare by numerator.
            let scale = y.iter().fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
            let y_int: Vec<BigInt> = y.iter().map(|v| v.numer() * (&scale / v.denom())).collect();
            let mut in_basis = vec![false; self.n()];
            for &j in &self.basis {
                if j < self.n() {
                    in_basis[j] = true;
                }
            }
            let mut entering: Option<(usize, Rational)> = None;
            for j in 0..self.n() {
                if in_basis[j] {
                    continue;
                }
                let cj = cost(j);
                let d = match &self.int_cols[j] {
                    Some(col) if cj.is_integer() => {
                        let mut num = cj.numer() * &scale;
                        for (i, v) in col {
                            if !y_int[*i].is_zero() {
                                num -= &y_int[*i] * v;
                            }
                        }
                        Rational::from_integer(num)
                    }
                    _ => (cj - self.dot_column(&y, j)) * Rational::from_integer(scale.clone()),
                };
                if !d.is_positive() {
                    continue;
                }
                if degenerate >= DEGENERATE_RUN {
                    entering = Some((j, d));
                    break;
                }
                if entering.as_ref().map_or(true, |(_, best)| d > *best) {
                    entering = Some((j, d));
                }
            }
            let Some((q, _)) = entering else {
                return true;
            };
            let alpha = self.column(q);
            let mut leave: Option<(usize, Rational)> = None;
            for r in 0..self.m {
                if !alpha[r].is_positive() {
                    continue;
                }
                let ratio = &self.xb[r] / &alpha[r];
                let better = match &leave {
                    None => true,
                    Some((lr, lv)) => ratio < *lv || (ratio == *lv && self.basis[r] < self.basis[*lr]),
                };
                if better {
                    leave = Some((r, ratio));
                }
            }
            let Some((r, step)) = leave else {
                return false;
            };
            if step.is_zero() {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
            self.pivot(r, q, &alpha);
        }
    }
}

/// Solves `max c·z  s.t.  A z = b, z ≥ 0` exactly; `a` is row-major with
/// `c.len()` columns.
pub fn solve(a: &[Vec<Rational>], b: &[Rational], c: &[Rational]) -> LpOutcome {
    let cols: Vec<SparseColumn> = (0..c.len())
        .map(|j| {
            a.iter()
                .enumerate()
                .filter(|(_, row)| !row[j].is_zero())
                .map(|(i, row)| (i, row[j].clone()))
                .collect()
        })
        .collect();
    solve_sparse(&cols, b, c)
}

/// As [`solve`] with `A` given by sparse columns over `b.len()` rows.
pub fn solve_sparse(cols: &[SparseColumn], b: &[Rational], c: &[Rational]) -> LpOutcome {
    let m = b.len();
    let n = cols.len();
    let sign: Vec<bool> = b.iter().map(|v| v.is_negative()).collect();
    let mut binv = vec![vec![Rational::zero(); m]; m];
    for (i, row) in binv.iter_mut().enumerate() {
        row[i] = Rational::from_integer(1.into());
    }
    let int_cols = cols
        .iter()
        .map(|col| {
            col.iter()
                .map(|(i, v)| {
                    v.is_integer().then(|| {
                        let v = v.to_integer();
                        if sign[*i] {
                            -v
                        } else {
                            v
                        }
                    })
                    .map(|v| (*i, v))
                })
                .collect::<Option<Vec<_>>>()
        })
        .collect();
    let mut lp = Revised {
        m,
        cols,
        int_cols,
        sign,
        binv,
        basis: (n..n + m).collect(),
        xb: b.iter().map(|v| v.abs()).collect(),
    };

    let phase1 = |j: usize| -> Rational {
        if j >= n {
            Rational::from_integer((-1).into())
        } else {
            Rational::zero()
        }
    };
    lp.optimize(&phase1);
    let infeasibility: Rational = (0..m)
        .filter(|&r| lp.basis[r] >= n)
        .map(|r| lp.xb[r].clone())
        .sum();
    if !infeasibility.is_zero() {
        return LpOutcome::Infeasible;
    }
    // Drive zero-level artificials out of the basis; rows where this fails
    // are redundant and their artificial stays at zero.
    for r in 0..m {
        if lp.basis[r] < n {
            continue;
        }
        let row = lp.binv[r].clone();
        let in_basis: std::collections::HashSet<usize> = lp.basis.iter().copied().collect();
        let q = (0..n).find(|&j| !in_basis.contains(&j) && !lp.dot_column(&row, j).is_zero());
        if let Some(q) = q {
            let alpha = lp.column(q);
            lp.pivot(r, q, &alpha);
        }
    }

    let phase2 = |j: usize| -> Rational {
        if j < n {
            c[j].clone()
        } else {
            Rational::zero()
        }
    };
    if !lp.optimize(&phase2) {
        return LpOutcome::Unbounded;
    }
    let mut x = vec![Rational::zero(); n];
    for r in 0..m {
        if lp.basis[r] < n {
            x[lp.basis[r]] = lp.xb[r].clone();
        }
    }
    let value = (0..n).filter(|&j| !x[j].is_zero()).map(|j| &c[j] * &x[j]).sum();
    let dual = lp
        .duals(&phase2)
        .into_iter()
        .zip(&lp.sign)
        .map(|(y, &s)| if s { -y } else { y })
        .collect();
    LpOutcome::Optimal { x, value, dual }
}

/// A nonnegative solution of `A z = b`, if one exists.
pub fn feasible_point(a: &[Vec<Rational>], b: &[Rational], cols: usize) -> Option<Vec<Rational>> {
    match solve(a, b, &vec![Rational::zero(); cols]) {
        LpOutcome::Optimal { x, .. } => Some(x),
        _ => None,
    }
}

/// Sparse-column form of [`feasible_point`].
pub fn feasible_point_sparse(cols: &[SparseColumn], b: &[Rational]) -> Option<Vec<Rational>> {
    match solve_sparse(cols, b, &vec![Rational::zero(); cols.len()]) {
        LpOutcome::Optimal { x, .. } => Some(x),
        _ => None,
    }
}
