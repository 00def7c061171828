//! Membership in the local and two-way local polytopes by exact LP.

use std::collections::HashSet;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::bell::BellFunctional;
use crate::boxes::CorrBox;
use crate::error::{Error, Result};
use crate::linalg;
use crate::lp::{self, LpOutcome, SparseColumn};
use crate::rational::{self, Rational};
use crate::shape::{BoxShape, MixedRadix};

/// Largest strategy list built before giving up.
pub const STRATEGY_CAP: usize = 200_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum StrategyKind {
    /// `outputs[k][x]` is party `k`'s output on input `x`.
    Local { outputs: Vec<Vec<usize>> },
    /// Parties `pair` answer jointly: `pair_outputs[x0][x1]` gives both
    /// outputs as a function of both inputs. Party `single` answers alone.
    TwoWay {
        pair: [usize; 2],
        single: usize,
        pair_outputs: Vec<Vec<[usize; 2]>>,
        single_outputs: Vec<usize>,
    },
    /// Alice sends `message[x]` and outputs `alice[x]`; Bob outputs
    /// `bob[y][m]` on receiving `m`.
    OneWay {
        message: Vec<usize>,
        alice: Vec<usize>,
        bob: Vec<Vec<usize>>,
    },
}

/// A deterministic strategy together with the 0/1 box it induces.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeterministicStrategy {
    pub kind: StrategyKind,
    pub table: CorrBox,
}

impl DeterministicStrategy {
    pub(crate) fn from_fn(kind: StrategyKind, shape: &BoxShape, f: impl Fn(&[usize]) -> Vec<usize>) -> Self {
        let one = rational::one();
        let zero = rational::zero();
        let table = CorrBox::from_fn(shape.clone(), |a, x| {
            if f(x) == a {
                one.clone()
            } else {
                zero.clone()
            }
        });
        DeterministicStrategy { kind, table }
    }
}

/// Every local deterministic strategy of `shape`.
pub fn enumerate_local_strategies(shape: &BoxShape) -> Result<Vec<DeterministicStrategy>> {
    let radices: Vec<usize> = (0..shape.parties())
        .flat_map(|k| shape.party_outputs(k).to_vec())
        .collect();
    let count = radices.iter().try_fold(1usize, |acc, &r| acc.checked_mul(r));
    if count.map_or(true, |c| c > STRATEGY_CAP) {
        return Err(Error::ResourceCap(format!(
            "shape {shape} has more than {STRATEGY_CAP} local strategies"
        )));
    }
    Ok(MixedRadix::new(radices)
        .map(|digits| {
            let mut outputs = Vec::with_capacity(shape.parties());
            let mut pos = 0;
            for k in 0..shape.parties() {
                outputs.push(digits[pos..pos + shape.inputs(k)].to_vec());
                pos += shape.inputs(k);
            }
            let o = outputs.clone();
            DeterministicStrategy::from_fn(StrategyKind::Local { outputs }, shape, |x| {
                (0..x.len()).map(|k| o[k][x[k]]).collect()
            })
        })
        .collect())
}

/// Deterministic strategies of the three bipartitions of a tripartite
/// shape. The pair side may answer with any function of both its inputs,
/// signalling within the pair included. Duplicate boxes are dropped.
pub fn enumerate_two_way_strategies(shape: &BoxShape) -> Result<Vec<DeterministicStrategy>> {
    if shape.parties() != 3 {
        return Err(Error::ShapeMismatch(format!(
            "two-way locality needs three parties, got {shape}"
        )));
    }
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for single in (0..3).rev() {
        let pair: [usize; 2] = match single {
            0 => [1, 2],
            1 => [0, 2],
            _ => [0, 1],
        };
        let (m0, m1) = (shape.inputs(pair[0]), shape.inputs(pair[1]));
        let mut radices = Vec::new();
        for x0 in 0..m0 {
            for x1 in 0..m1 {
                radices.push(shape.outputs(pair[0], x0) * shape.outputs(pair[1], x1));
            }
        }
        let single_radices = shape.party_outputs(single).to_vec();
        let count = radices
            .iter()
            .chain(&single_radices)
            .try_fold(1usize, |acc, &r| acc.checked_mul(r));
        if count.map_or(true, |c| c > STRATEGY_CAP) {
            return Err(Error::ResourceCap(format!(
                "shape {shape} has more than {STRATEGY_CAP} two-way strategies"
            )));
        }
        for pd in MixedRadix::new(radices) {
            let pair_outputs: Vec<Vec<[usize; 2]>> = (0..m0)
                .map(|x0| {
                    (0..m1)
                        .map(|x1| {
                            let v = pd[x0 * m1 + x1];
                            let d1 = shape.outputs(pair[1], x1);
                            [v / d1, v % d1]
                        })
                        .collect()
                })
                .collect();
            for sd in MixedRadix::new(single_radices.clone()) {
                let (po, so) = (pair_outputs.clone(), sd.clone());
                let s = DeterministicStrategy::from_fn(
                    StrategyKind::TwoWay {
                        pair,
                        single,
                        pair_outputs: pair_outputs.clone(),
                        single_outputs: sd,
                    },
                    shape,
                    |x| {
                        let mut a = vec![0; 3];
                        let [p, q] = po[x[pair[0]]][x[pair[1]]];
                        a[pair[0]] = p;
                        a[pair[1]] = q;
                        a[single] = so[x[single]];
                        a
                    },
                );
                if seen.insert(s.table.integer_key()) {
                    out.push(s);
                }
            }
        }
    }
    Ok(out)
}

/// Nonnegative weights over strategies, summing to one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalModel {
    pub weights: Vec<(Rational, DeterministicStrategy)>,
}

impl LocalModel {
    pub fn induced_box(&self) -> Result<CorrBox> {
        let parts: Vec<(Rational, &CorrBox)> = self
            .weights
            .iter()
            .map(|(w, s)| (w.clone(), &s.table))
            .collect();
        CorrBox::mixture(&parts)
    }

    /// Weights are positive, sum to one and reproduce `b` entrywise.
    pub fn verify(&self, b: &CorrBox) -> bool {
        let total: Rational = self.weights.iter().map(|(w, _)| w.clone()).sum();
        total.is_one()
            && self.weights.iter().all(|(w, _)| w.is_positive())
            && self.induced_box().map_or(false, |m| &m == b)
    }
}

/// A functional with `value > threshold ≥ f(s)` for every strategy `s`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeparatingCertificate {
    pub functional: BellFunctional,
    pub threshold: Rational,
    pub value: Rational,
}

impl SeparatingCertificate {
    /// Rechecks the certificate against `b` and a strategy list.
    pub fn verify(&self, b: &CorrBox, strategies: &[DeterministicStrategy]) -> bool {
        let Ok(v) = self.functional.evaluate(b) else {
            return false;
        };
        v == self.value
            && v > self.threshold
            && strategies.iter().all(|s| {
                self.functional
                    .evaluate(&s.table)
                    .map_or(false, |x| x <= self.threshold)
            })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Membership {
    Inside(LocalModel),
    Outside(SeparatingCertificate),
}

impl Membership {
    pub fn is_inside(&self) -> bool {
        matches!(self, Membership::Inside(_))
    }

    pub fn model(&self) -> Option<&LocalModel> {
        match self {
            Membership::Inside(m) => Some(m),
            Membership::Outside(_) => None,
        }
    }

    pub fn certificate(&self) -> Option<&SeparatingCertificate> {
        match self {
            Membership::Inside(_) => None,
            Membership::Outside(c) => Some(c),
        }
    }
}

pub fn is_local(b: &CorrBox) -> Result<Membership> {
    b.ensure_valid()?;
    membership(b, &enumerate_local_strategies(b.shape())?)
}

pub fn is_two_way_local(b: &CorrBox) -> Result<Membership> {
    b.ensure_valid()?;
    membership(b, &enumerate_two_way_strategies(b.shape())?)
}

/// Decides whether `b` is a mixture of `strategies`, all of `b`'s shape.
///
/// The LPs only use table positions on which the strategies are linearly
/// independent. On failure the certificate comes from the dual of
/// `max v : Σ w_s s − v (b − u) = u, w, v ≥ 0` with `u` the uniform box,
/// which supports the strategy polytope where the segment from `u` towards
/// `b` leaves it. The functional is then made canonical: projected onto the
/// span of the strategies, shifted to vanish on `u`, and scaled so that the
/// largest strategy value is 2.
pub fn membership(b: &CorrBox, strategies: &[DeterministicStrategy]) -> Result<Membership> {
    let shape = b.shape();
    if let Some(s) = strategies.iter().find(|s| s.table.shape() != shape) {
        return Err(Error::ShapeMismatch(format!(
            "strategy of shape {} for a box of shape {shape}",
            s.table.shape()
        )));
    }
    if strategies.is_empty() {
        return Err(Error::Parameter("empty strategy list".into()));
    }
    let (span, coords) = strategy_span(strategies);
    if let Some(model) = mixture_on(b, strategies, &coords) {
        return Ok(Membership::Inside(model));
    }

    let u = CorrBox::uniform(shape);
    let cols = strategies.len();
    let mut a = restricted_columns(strategies, &coords);
    a.push(
        coords
            .iter()
            .enumerate()
            .map(|(r, &i)| (r, &u.table()[i] - &b.table()[i]))
            .filter(|(_, v)| !v.is_zero())
            .collect(),
    );
    let mut c = vec![rational::zero(); cols + 1];
    c[cols] = rational::one();
    let rhs: Vec<Rational> = coords.iter().map(|&i| u.table()[i].clone()).collect();
    let dual = match lp::solve_sparse(&a, &rhs, &c) {
        LpOutcome::Optimal { dual, .. } => dual,
        other => {
            return Err(Error::Parameter(format!(
                "separation LP ended as {other:?}; the strategies do not contain the uniform box"
            )))
        }
    };
    let mut g = vec![rational::zero(); shape.table_len()];
    for (r, &i) in coords.iter().enumerate() {
        g[i] = -&dual[r];
    }

    let basis: Vec<&[Rational]> = span.iter().map(|&s| strategies[s].table.table()).collect();
    let g = project(&basis, &g);
    let shift = dot(&g, u.table()) / rational::int(shape.joint_inputs() as i64);
    let g: Vec<Rational> = g.iter().map(|v| v - &shift).collect();
    let g = project(&basis, &g);
    let threshold_raw = strategies
        .iter()
        .map(|s| dot(&g, s.table.table()))
        .max()
        .expect("nonempty strategy list");
    if !threshold_raw.is_positive() {
        return Err(Error::Parameter(
            "degenerate separating functional; the strategies do not surround the uniform box".into(),
        ));
    }
    let scale = rational::int(2) / threshold_raw;
    let coefficients: Vec<Rational> = g.iter().map(|v| v * &scale).collect();
    let mut functional = BellFunctional::new(shape.clone(), coefficients)?;
    functional.local_bound = Some(rational::int(2));
    let value = functional.evaluate(b)?;
    let cert = SeparatingCertificate {
        functional,
        threshold: rational::int(2),
        value,
    };
    if !cert.verify(b, strategies) {
        return Err(Error::Parameter(
            "separating functional failed verification; the box lies outside the strategies' span".into(),
        ));
    }
    Ok(Membership::Outside(cert))
}

/// Indices of strategies forming a basis of their span, and table positions
/// on which that basis is independent (sorted).
fn strategy_span(strategies: &[DeterministicStrategy]) -> (Vec<usize>, Vec<usize>) {
    let tables: Vec<Vec<i64>> = strategies
        .iter()
        .map(|s| s.table.table().iter().map(|v| if v.is_zero() { 0 } else { 1 }).collect())
        .collect();
    let (span, mut coords) = linalg::independent_mod_p(&tables);
    coords.sort_unstable();
    (span, coords)
}

/// Looks for a mixture of `strategies` equal to `b`, using the rows
/// `coords` first and the full table if the reduced answer is spurious.
fn mixture_on(b: &CorrBox, strategies: &[DeterministicStrategy], coords: &[usize]) -> Option<LocalModel> {
    match find_model(b, strategies, coords) {
        ModelSearch::Found(model) => Some(model),
        ModelSearch::Mismatch => {
            let all: Vec<usize> = (0..b.shape().table_len()).collect();
            match find_model(b, strategies, &all) {
                ModelSearch::Found(model) => Some(model),
                _ => None,
            }
        }
        ModelSearch::Infeasible => None,
    }
}

/// A convex combination of `strategies` reproducing `b`, if one exists.
pub fn find_mixture(b: &CorrBox, strategies: &[DeterministicStrategy]) -> Result<Option<LocalModel>> {
    if let Some(s) = strategies.iter().find(|s| s.table.shape() != b.shape()) {
        return Err(Error::ShapeMismatch(format!(
            "strategy of shape {} for a box of shape {}",
            s.table.shape(),
            b.shape()
        )));
    }
    if strategies.is_empty() {
        return Ok(None);
    }
    let (_, coords) = strategy_span(strategies);
    Ok(mixture_on(b, strategies, &coords))
}

fn restricted_columns(strategies: &[DeterministicStrategy], rows: &[usize]) -> Vec<SparseColumn> {
    strategies
        .iter()
        .map(|s| {
            rows.iter()
                .enumerate()
                .filter(|(_, &i)| !s.table.table()[i].is_zero())
                .map(|(r, &i)| (r, s.table.table()[i].clone()))
                .collect()
        })
        .collect()
}

enum ModelSearch {
    Found(LocalModel),
    Mismatch,
    Infeasible,
}

fn find_model(b: &CorrBox, strategies: &[DeterministicStrategy], rows: &[usize]) -> ModelSearch {
    let a = restricted_columns(strategies, rows);
    let rhs: Vec<Rational> = rows.iter().map(|&i| b.table()[i].clone()).collect();
    let Some(x) = lp::feasible_point_sparse(&a, &rhs) else {
        return ModelSearch::Infeasible;
    };
    let model = LocalModel {
        weights: x
            .into_iter()
            .zip(strategies)
            .filter(|(w, _)| !w.is_zero())
            .map(|(w, s)| (w, s.clone()))
            .collect(),
    };
    if model.verify(b) {
        ModelSearch::Found(model)
    } else {
        ModelSearch::Mismatch
    }
}

fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter()
        .zip(b)
        .filter(|(x, _)| !x.is_zero())
        .map(|(x, y)| x * y)
        .sum()
}

/// Orthogonal projection of `g` onto the span of the independent vectors
/// `basis`.
fn project(basis: &[&[Rational]], g: &[Rational]) -> Vec<Rational> {
    let k = basis.len();
    let mut system: Vec<Vec<Rational>> = (0..k)
        .map(|i| {
            let mut row: Vec<Rational> = (0..k).map(|j| dot(basis[i], basis[j])).collect();
            row.push(dot(basis[i], g));
            row
        })
        .collect();
    linalg::rref(&mut system);
    let coef: Vec<Rational> = system.iter().map(|row| row[k].clone()).collect();
    (0..g.len())
        .map(|t| {
            basis
                .iter()
                .zip(&coef)
                .filter(|(_, c)| !c.is_zero())
                .map(|(v, c)| c * &v[t])
                .sum()
        })
        .collect()
}
