//! Vertex enumeration of polytopes given in equality form.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::boxes::CorrBox;
use crate::dd::{self, DdConfig, DdStats};
use crate::error::{Error, Result};
use crate::polytope::{build_hrep, HPolytope};
use crate::rational::Rational;
use crate::shape::BoxShape;

/// Vertex list of a polytope, sorted by table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VRep {
    pub shape: BoxShape,
    pub vertices: Vec<CorrBox>,
    /// False for lists that were not produced by a full enumeration, such
    /// as a directory of hand-picked boxes.
    pub complete: bool,
}

impl VRep {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }
}

/// Vertices of `{p ≥ 0 : E p = b}` via the cone `{(p, t) ≥ 0 : E p − b t = 0}`.
pub fn enumerate_vertices(h: &HPolytope, cfg: &DdConfig) -> Result<VRep> {
    enumerate_vertices_with_stats(h, cfg).map(|(v, _)| v)
}

pub fn enumerate_vertices_with_stats(h: &HPolytope, cfg: &DdConfig) -> Result<(VRep, DdStats)> {
    let n = h.ambient_dimension();
    let rows: Vec<Vec<Rational>> = h
        .equalities
        .iter()
        .map(|r| {
            let mut row = r.coeffs.clone();
            row.push(-r.rhs.clone());
            row
        })
        .collect();
    let live = live_coordinates(&rows, n + 1);
    if !live.contains(&n) {
        // t is forced to zero: the polytope is empty.
        let empty = VRep { shape: h.shape.clone(), vertices: Vec::new(), complete: true };
        return Ok((empty, DdStats::default()));
    }
    let reduced: Vec<Vec<Rational>> = rows
        .iter()
        .map(|r| live.iter().map(|&i| r[i].clone()).collect::<Vec<_>>())
        .filter(|r| r.iter().any(|v| !v.is_zero()))
        .collect();
    let (rays, stats) = dd::extreme_rays_with_stats(&reduced, live.len(), cfg)?;
    let mut vertices = Vec::with_capacity(rays.len());
    for short in rays {
        let mut ray = vec![0i64; n + 1];
        for (&i, v) in live.iter().zip(short) {
            ray[i] = v;
        }
        let t = ray[n];
        if t == 0 {
            return Err(Error::Unbounded);
        }
        let table = ray[..n]
            .iter()
            .map(|&v| Rational::new(BigInt::from(v), BigInt::from(t)))
            .collect();
        vertices.push(CorrBox::new(h.shape.clone(), table)?);
    }
    vertices.sort();
    Ok((
        VRep {
            shape: h.shape.clone(),
            vertices,
            complete: true,
        },
        stats,
    ))
}

/// Coordinates of `{z ≥ 0 : rows · z = 0}` not forced to zero by a row whose
/// nonzero coefficients all share one sign.
fn live_coordinates(rows: &[Vec<Rational>], m: usize) -> Vec<usize> {
    let mut dead = vec![false; m];
    loop {
        let mut changed = false;
        for r in rows {
            let mut pos = false;
            let mut neg = false;
            for (i, v) in r.iter().enumerate() {
                if !dead[i] {
                    pos |= v.is_positive();
                    neg |= v.is_negative();
                }
            }
            if pos != neg {
                for (i, v) in r.iter().enumerate() {
                    if !dead[i] && !v.is_zero() {
                        dead[i] = true;
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            return (0..m).filter(|&i| !dead[i]).collect();
        }
    }
}

/// Vertices of the no-signalling polytope of `shape`.
pub fn ns_vertices(shape: &BoxShape, cfg: &DdConfig) -> Result<VRep> {
    enumerate_vertices(&build_hrep(shape), cfg)
}
