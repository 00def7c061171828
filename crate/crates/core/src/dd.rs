//! Double description method for pointed cones `{z : E z = 0, z ≥ 0}`.
//!
//! The cone is first restricted to the nullspace of `E`, which is spanned by
//! an exact integer basis. Starting from the simplicial cone cut out by a
//! set of coordinates on which the basis is invertible, the remaining
//! coordinates are added one at a time. Rays are primitive integer vectors
//! over all coordinates, so evaluating a constraint is reading a coordinate.
//! Adjacency uses the combinatorial test on zero sets.

use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::linalg;
use crate::rational::Rational;

/// Order in which the remaining nonnegativity constraints are added.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InsertionOrder {
    /// Pick the constraint whose positive/negative split of the current rays
    /// is most balanced.
    MaxBalance,
    /// Pick the constraint creating the fewest candidate pairs.
    MinPairs,
    /// Use the listed coordinate order (coordinates not listed follow in
    /// index order).
    Given(Vec<usize>),
}

#[derive(Debug, Clone)]
pub struct DdConfig {
    /// Fails once the intermediate ray count exceeds this.
    pub max_rays: usize,
    /// Fails once the wall-clock time exceeds this.
    pub time_budget: Option<Duration>,
    pub order: InsertionOrder,
}

impl Default for DdConfig {
    fn default() -> Self {
        DdConfig {
            max_rays: 2_000_000,
            time_budget: None,
            order: InsertionOrder::MaxBalance,
        }
    }
}

/// Statistics from one run.
#[derive(Debug, Clone, Default)]
pub struct DdStats {
    pub cone_dimension: usize,
    pub max_intermediate_rays: usize,
    pub pairs_tested: u64,
}

struct Rays {
    m: usize,
    words: usize,
    coords: Vec<i64>,
    zeros: Vec<u64>,
}

impl Rays {
    fn new(m: usize) -> Self {
        Rays {
            m,
            words: m.div_ceil(64),
            coords: Vec::new(),
            zeros: Vec::new(),
        }
    }

    fn len(&self) -> usize {
        self.coords.len() / self.m
    }

    fn coord(&self, r: usize, j: usize) -> i64 {
        self.coords[r * self.m + j]
    }

    fn ray(&self, r: usize) -> &[i64] {
        &self.coords[r * self.m..(r + 1) * self.m]
    }

    fn zero_set(&self, r: usize) -> &[u64] {
        &self.zeros[r * self.words..(r + 1) * self.words]
    }

    fn push(&mut self, coords: &[i64], processed: &[u64]) {
        self.coords.extend_from_slice(coords);
        let base = self.zeros.len();
        self.zeros.resize(base + self.words, 0);
        for (j, &c) in coords.iter().enumerate() {
            if c == 0 && processed[j / 64] >> (j % 64) & 1 == 1 {
                self.zeros[base + j / 64] |= 1 << (j % 64);
            }
        }
    }
}

fn to_i64(v: &BigInt) -> Result<i64> {
    v.to_i64().ok_or(Error::Overflow("double description"))
}

fn gcd_normalize(v: &mut [i128]) {
    let g = v.iter().fold(0i128, |acc, &x| acc.gcd(&x));
    if g > 1 {
        v.iter_mut().for_each(|x| *x /= g);
    }
}

/// Extreme rays of `{z ∈ R^m : rows · z = 0, z ≥ 0}`, sorted.
pub fn extreme_rays(rows: &[Vec<Rational>], m: usize, cfg: &DdConfig) -> Result<Vec<Vec<i64>>> {
    extreme_rays_with_stats(rows, m, cfg).map(|(r, _)| r)
}

pub fn extreme_rays_with_stats(
    rows: &[Vec<Rational>],
    m: usize,
    cfg: &DdConfig,
) -> Result<(Vec<Vec<i64>>, DdStats)> {
    let start = Instant::now();
    let basis = linalg::nullspace(rows, m);
    let dim = basis.len();
    let mut stats = DdStats {
        cone_dimension: dim,
        ..Default::default()
    };
    if dim == 0 {
        return Ok((Vec::new(), stats));
    }

    // Coordinates on which the basis is invertible.
    let basis_row = |i: usize| -> Vec<Rational> {
        basis.iter().map(|b| Rational::from_integer(b[i].clone())).collect()
    };
    let mut echelon: Vec<Vec<Rational>> = Vec::new();
    let mut chosen: Vec<usize> = Vec::new();
    for i in 0..m {
        let mut trial = echelon.clone();
        trial.push(basis_row(i));
        if linalg::rref(&mut trial).len() > echelon.len() {
            echelon = trial;
            chosen.push(i);
            if chosen.len() == dim {
                break;
            }
        }
    }
    debug_assert_eq!(chosen.len(), dim);

    // Initial rays: the vectors of the nullspace with z_chosen = e_k.
    // Solve [B_S | I] by Gauss-Jordan to get B_S^{-1}.
    let mut aug: Vec<Vec<Rational>> = chosen
        .iter()
        .enumerate()
        .map(|(r, &i)| {
            let mut row = basis_row(i);
            row.extend((0..dim).map(|c| {
                if c == r {
                    Rational::from_integer(1.into())
                } else {
                    Rational::zero()
                }
            }));
            row
        })
        .collect();
    linalg::rref(&mut aug);
    let inv: Vec<Vec<Rational>> = aug.iter().map(|row| row[dim..].to_vec()).collect();

    let mut processed = vec![0u64; m.div_ceil(64)];
    for &i in &chosen {
        processed[i / 64] |= 1 << (i % 64);
    }
    let mut rays = Rays::new(m);
    for k in 0..dim {
        // coefficients c = B_S^{-1} e_k, ray = B c
        let coeffs: Vec<Rational> = (0..dim).map(|r| inv[r][k].clone()).collect();
        let z: Vec<Rational> = (0..m)
            .map(|i| {
                basis
                    .iter()
                    .zip(&coeffs)
                    .map(|(b, c)| c * Rational::from_integer(b[i].clone()))
                    .sum()
            })
            .collect();
        let ints = linalg::integer_row(&z);
        let ints = ints.iter().map(to_i64).collect::<Result<Vec<_>>>()?;
        rays.push(&ints, &processed);
    }

    let mut remaining: Vec<usize> = {
        let mut is_chosen = vec![false; m];
        chosen.iter().for_each(|&i| is_chosen[i] = true);
        (0..m).filter(|&i| !is_chosen[i]).collect()
    };
    if let InsertionOrder::Given(order) = &cfg.order {
        let mut ordered: Vec<usize> = order
            .iter()
            .copied()
            .filter(|i| remaining.contains(i))
            .collect();
        ordered.dedup();
        for &i in &remaining {
            if !ordered.contains(&i) {
                ordered.push(i);
            }
        }
        remaining = ordered;
        remaining.reverse();
    }

    while !remaining.is_empty() {
        if let Some(budget) = cfg.time_budget {
            if start.elapsed() > budget {
                return Err(Error::ResourceCap(format!(
                    "time budget {budget:?} exhausted with {} constraints left and {} rays",
                    remaining.len(),
                    rays.len()
                )));
            }
        }
        let pick = match cfg.order {
            InsertionOrder::Given(_) => remaining.len() - 1,
            _ => select(&rays, &remaining, &cfg.order),
        };
        let j = remaining.swap_remove(pick);
        processed[j / 64] |= 1 << (j % 64);
        rays = add_constraint(&rays, j, dim, &processed, &mut stats)?;
        stats.max_intermediate_rays = stats.max_intermediate_rays.max(rays.len());
        if rays.len() > cfg.max_rays {
            return Err(Error::ResourceCap(format!(
                "{} intermediate rays exceed the cap of {} ({} constraints left)",
                rays.len(),
                cfg.max_rays,
                remaining.len()
            )));
        }
    }

    let mut out: Vec<Vec<i64>> = (0..rays.len()).map(|r| rays.ray(r).to_vec()).collect();
    out.sort();
    out.dedup();
    Ok((out, stats))
}

fn split(rays: &Rays, j: usize) -> (usize, usize) {
    let mut pos = 0;
    let mut neg = 0;
    for r in 0..rays.len() {
        match rays.coord(r, j).signum() {
            1 => pos += 1,
            -1 => neg += 1,
            _ => {}
        }
    }
    (pos, neg)
}

fn select(rays: &Rays, remaining: &[usize], order: &InsertionOrder) -> usize {
    let mut best = 0;
    let mut best_key = (u64::MAX, usize::MAX);
    for (idx, &j) in remaining.iter().enumerate() {
        let (pos, neg) = split(rays, j);
        let key = match order {
            InsertionOrder::MaxBalance => {
                // most balanced first; constraints with nothing to cut are free
                if neg == 0 {
                    (0, j)
                } else {
                    (u64::MAX - pos.min(neg) as u64 - 1, j)
                }
            }
            _ => ((pos as u64) * (neg as u64), j),
        };
        if key < best_key {
            best_key = key;
            best = idx;
        }
    }
    best
}

fn add_constraint(
    rays: &Rays,
    j: usize,
    dim: usize,
    processed: &[u64],
    stats: &mut DdStats,
) -> Result<Rays> {
    let n = rays.len();
    let words = rays.words;
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    let mut out = Rays::new(rays.m);
    for r in 0..n {
        let c = rays.coord(r, j);
        if c > 0 {
            pos.push(r);
        } else if c < 0 {
            neg.push(r);
        }
        if c >= 0 {
            out.push(rays.ray(r), processed);
        }
    }
    if neg.is_empty() || pos.is_empty() {
        return Ok(out);
    }
    let need = dim.saturating_sub(2) as u32;
    let mut common = vec![0u64; words];
    let mut combo = vec![0i128; rays.m];
    let mut combo64 = vec![0i64; rays.m];
    for &p in &pos {
        let zp = rays.zero_set(p);
        for &q in &neg {
            let zq = rays.zero_set(q);
            let mut count = 0u32;
            for w in 0..words {
                common[w] = zp[w] & zq[w];
                count += common[w].count_ones();
            }
            if count < need {
                continue;
            }
            stats.pairs_tested += 1;
            let blocked = (0..n).any(|r| {
                r != p
                    && r != q
                    && rays
                        .zero_set(r)
                        .iter()
                        .zip(&common)
                        .all(|(z, c)| z & c == *c)
            });
            if blocked {
                continue;
            }
            let cp = rays.coord(p, j) as i128;
            let cq = -(rays.coord(q, j) as i128);
            let (rp, rq) = (rays.ray(p), rays.ray(q));
            for i in 0..rays.m {
                combo[i] = cq
                    .checked_mul(rp[i] as i128)
                    .and_then(|a| cp.checked_mul(rq[i] as i128).and_then(|b| a.checked_add(b)))
                    .ok_or(Error::Overflow("double description"))?;
            }
            gcd_normalize(&mut combo);
            for i in 0..rays.m {
                combo64[i] = i64::try_from(combo[i]).map_err(|_| Error::Overflow("double description"))?;
            }
            debug_assert_eq!(combo64[j], 0);
            out.push(&combo64, processed);
        }
    }
    Ok(out)
}

/// Converts an integer ray into exact rationals divided by `scale`.
pub fn ray_to_rationals(ray: &[i64], scale: i64) -> Vec<Rational> {
    ray.iter()
        .map(|&v| Rational::new(BigInt::from(v), BigInt::from(scale)))
        .collect()
}

/// Sign-checks that a ray lies in the cone (used by tests and assertions).
pub fn in_cone(rows: &[Vec<Rational>], ray: &[i64]) -> bool {
    ray.iter().all(|&v| v >= 0)
        && rows.iter().all(|row| {
            let s: Rational = row
                .iter()
                .zip(ray)
                .map(|(c, &v)| c * Rational::from_integer(v.into()))
                .sum();
            s.is_zero()
        })
        && ray.iter().any(|&v| v > 0)
}
