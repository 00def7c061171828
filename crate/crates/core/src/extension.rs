//! No-signalling extensions of a bipartite box to an environment party `E`.

use num_traits::Zero;

use crate::boxes::CorrBox;
use crate::dd::DdConfig;
use crate::error::{Error, Result};
use crate::polytope::{build_hrep, HPolytope};
use crate::rational::{self, Rational};
use crate::shape::BoxShape;
use crate::vertices::enumerate_vertices;

/// Largest extension table we are willing to enumerate.
pub const EXTENSION_TABLE_CAP: usize = 512;

/// Midpoints of vertex pairs checked as a guard on the vertex test.
const MIDPOINT_SAMPLES: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtensionPolytope {
    pub base: CorrBox,
    /// Output count of `E` per input.
    pub env_outputs: Vec<usize>,
    /// Tripartite no-signalling rows on `(A, B, E)` plus the marginal rows.
    pub hrep: HPolytope,
}

impl ExtensionPolytope {
    pub fn shape(&self) -> &BoxShape {
        &self.hrep.shape
    }

    /// `base ⊗ uniform(E)`, always a point of the polytope.
    pub fn product_point(&self) -> CorrBox {
        let shape = self.shape().clone();
        let base = &self.base;
        let env = &self.env_outputs;
        CorrBox::from_fn(shape, |a, x| {
            base.get(&a[..2], &x[..2]) * rational::ratio(1, env[x[2]] as i64)
        })
    }

    /// Whether `p` equals `base · p(e|E)` entrywise, with `p(e|E)` its own
    /// `E` marginal.
    pub fn factorizes(&self, p: &CorrBox) -> bool {
        let shape = self.shape();
        p.shape() == shape
            && shape.entries().all(|(a, x)| {
                let pe = p.party_marginal(2, a[2], x[2]);
                *p.get(&a, &x) == self.base.get(&a[..2], &x[..2]) * pe
            })
    }
}

/// The polytope of tripartite no-signalling boxes `p(abe|XYE)` with
/// `Σ_e p(abe|XYE) = base(ab|XY)` for every `E`.
pub fn build_extension_polytope(base: &CorrBox, env_outputs: &[usize]) -> Result<ExtensionPolytope> {
    base.ensure_valid()?;
    if base.shape().parties() != 2 {
        return Err(Error::ShapeMismatch(format!(
            "extensions need a bipartite base, got {}",
            base.shape()
        )));
    }
    let env = BoxShape::new(vec![env_outputs.to_vec()])?;
    let shape = base.shape().join(&env)?;
    if shape.table_len() > EXTENSION_TABLE_CAP {
        return Err(Error::ResourceCap(format!(
            "extension table of {} entries exceeds {EXTENSION_TABLE_CAP}",
            shape.table_len()
        )));
    }
    let mut hrep = build_hrep(&shape);
    let bs = base.shape();
    for (ab, xy) in bs.entries() {
        for z in 0..env_outputs.len() {
            let mut row = vec![rational::zero(); shape.table_len()];
            for e in 0..env_outputs[z] {
                row[shape.index(&[ab[0], ab[1], e], &[xy[0], xy[1], z])] = rational::one();
            }
            hrep.push(row, base.get(&ab, &xy).clone());
        }
    }
    Ok(ExtensionPolytope {
        base: base.clone(),
        env_outputs: env_outputs.to_vec(),
        hrep,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactorizationReport {
    pub factorizes: bool,
    /// A non-factorizing vertex when `factorizes` is false.
    pub witness: Option<CorrBox>,
    pub vertices: usize,
}

/// Enumerates the extension polytope and checks every vertex for
/// `p(abe|XYE) = p(ab|XY) p(e|E)`.
pub fn all_extensions_factorize(
    base: &CorrBox,
    env_outputs: &[usize],
    cfg: &DdConfig,
) -> Result<FactorizationReport> {
    let poly = build_extension_polytope(base, env_outputs)?;
    let vrep = enumerate_vertices(&poly.hrep, cfg)?;
    let witness = vrep.vertices.iter().find(|v| !poly.factorizes(v)).cloned();
    if witness.is_none() {
        check_midpoints(&poly, &vrep.vertices)?;
    }
    Ok(FactorizationReport {
        factorizes: witness.is_none(),
        witness,
        vertices: vrep.len(),
    })
}

/// Factorizing points with a fixed `AB` marginal are closed under mixing,
/// so no midpoint may fail once all vertices pass.
fn check_midpoints(poly: &ExtensionPolytope, vertices: &[CorrBox]) -> Result<()> {
    let n = vertices.len();
    if n < 2 {
        return Ok(());
    }
    let half = rational::ratio(1, 2);
    let pairs = n * (n - 1) / 2;
    let step = (pairs / MIDPOINT_SAMPLES).max(1);
    let mut k = 0;
    for i in 0..n {
        for j in i + 1..n {
            if k % step == 0 {
                let mid = CorrBox::mixture(&[(half.clone(), &vertices[i]), (half.clone(), &vertices[j])])?;
                if !poly.hrep.contains(mid.table()) || !poly.factorizes(&mid) {
                    return Err(Error::InvalidBox {
                        count: 1,
                        first: format!("midpoint of vertices {i} and {j} breaks factorization"),
                    });
                }
            }
            k += 1;
        }
    }
    Ok(())
}

/// `Σ |p − base · p(e|E)|` over all entries, zero iff `p` factorizes.
pub fn factorization_defect(poly: &ExtensionPolytope, p: &CorrBox) -> Rational {
    let mut total = rational::zero();
    for (a, x) in poly.shape().entries() {
        let d = p.get(&a, &x) - poly.base.get(&a[..2], &x[..2]) * p.party_marginal(2, a[2], x[2]);
        if !d.is_zero() {
            total += num_traits::Signed::abs(&d);
        }
    }
    total
}
