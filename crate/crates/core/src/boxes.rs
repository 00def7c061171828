//! The correlation box: an exact conditional probability table.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{self, Rational};
use crate::shape::{BoxShape, MixedRadix};

/// `p(outputs | inputs)` for every entry of a [`BoxShape`], in canonical
/// table order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CorrBox {
    shape: BoxShape,
    table: Vec<Rational>,
}

/// One violated positivity, normalization or no-signalling constraint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    Negative {
        outputs: Vec<usize>,
        inputs: Vec<usize>,
        value: Rational,
    },
    Normalization {
        inputs: Vec<usize>,
        sum: Rational,
    },
    /// Summing out `party` gives different tables for its inputs `input_a`
    /// and `input_b`, at the listed outputs/inputs of the remaining parties.
    Signalling {
        party: usize,
        input_a: usize,
        input_b: usize,
        other_outputs: Vec<usize>,
        other_inputs: Vec<usize>,
        sum_a: Rational,
        sum_b: Rational,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Negative { outputs, inputs, value } => write!(
                f,
                "positivity: p({outputs:?}|{inputs:?}) = {}",
                rational::format(value)
            ),
            Violation::Normalization { inputs, sum } => write!(
                f,
                "normalization: entries for inputs {inputs:?} sum to {}",
                rational::format(sum)
            ),
            Violation::Signalling {
                party,
                input_a,
                input_b,
                other_outputs,
                other_inputs,
                sum_a,
                sum_b,
            } => write!(
                f,
                "no-signalling: marginal of the others at outputs {other_outputs:?} inputs \
                 {other_inputs:?} is {} when party {party} inputs {input_a} but {} when it \
                 inputs {input_b}",
                rational::format(sum_a),
                rational::format(sum_b)
            ),
        }
    }
}

/// Result of [`CorrBox::validate`]. Empty means valid.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl CorrBox {
    /// Wraps a table; only the size is checked here.
    pub fn new(shape: BoxShape, table: Vec<Rational>) -> Result<Self> {
        if table.len() != shape.table_len() {
            return Err(Error::TableSize {
                expected: shape.table_len(),
                found: table.len(),
            });
        }
        Ok(CorrBox { shape, table })
    }

    /// Builds a table from a function of `(outputs, inputs)`.
    pub fn from_fn(shape: BoxShape, f: impl Fn(&[usize], &[usize]) -> Rational) -> Self {
        let table = shape.entries().map(|(a, x)| f(&a, &x)).collect();
        CorrBox { shape, table }
    }

    /// Like [`CorrBox::new`] but also requires every constraint to hold.
    pub fn new_valid(shape: BoxShape, table: Vec<Rational>) -> Result<Self> {
        let b = Self::new(shape, table)?;
        b.ensure_valid()?;
        Ok(b)
    }

    pub fn uniform(shape: &BoxShape) -> Self {
        CorrBox::from_fn(shape.clone(), |a, x| {
            let size: usize = (0..a.len()).map(|k| shape.outputs(k, x[k])).product();
            rational::ratio(1, size as i64)
        })
    }

    /// Deterministic box where party `k` outputs `outputs[k][x]` on input `x`.
    pub fn deterministic(shape: &BoxShape, outputs: &[Vec<usize>]) -> Result<Self> {
        if outputs.len() != shape.parties() {
            return Err(Error::ShapeMismatch("one output function per party".into()));
        }
        for (k, f) in outputs.iter().enumerate() {
            if f.len() != shape.inputs(k) {
                return Err(Error::ShapeMismatch(format!(
                    "party {k} output function covers {} inputs, shape has {}",
                    f.len(),
                    shape.inputs(k)
                )));
            }
            for (x, &a) in f.iter().enumerate() {
                if a >= shape.outputs(k, x) {
                    return Err(Error::Parameter(format!(
                        "party {k} input {x}: output {a} out of range"
                    )));
                }
            }
        }
        Ok(CorrBox::from_fn(shape.clone(), |a, x| {
            if (0..a.len()).all(|k| a[k] == outputs[k][x[k]]) {
                rational::one()
            } else {
                rational::zero()
            }
        }))
    }

    pub fn shape(&self) -> &BoxShape {
        &self.shape
    }

    pub fn table(&self) -> &[Rational] {
        &self.table
    }

    pub fn into_table(self) -> Vec<Rational> {
        self.table
    }

    pub fn get(&self, outputs: &[usize], inputs: &[usize]) -> &Rational {
        &self.table[self.shape.index(outputs, inputs)]
    }

    /// Checks positivity, normalization and no-signalling exactly.
    pub fn validate(&self) -> ValidationReport {
        let shape = &self.shape;
        let mut violations = Vec::new();
        for (i, v) in self.table.iter().enumerate() {
            if v.is_negative() {
                let (outputs, inputs) = shape.entry(i);
                violations.push(Violation::Negative {
                    outputs,
                    inputs,
                    value: v.clone(),
                });
            }
        }
        for j in 0..shape.joint_inputs() {
            let off = shape.block_offset(j);
            let sum: Rational = self.table[off..off + shape.block_len(j)].iter().sum();
            if !sum.is_one() {
                violations.push(Violation::Normalization {
                    inputs: shape.decode_inputs(j),
                    sum,
                });
            }
        }
        for party in 0..shape.parties() {
            self.signalling_violations(party, &mut violations);
        }
        ValidationReport { violations }
    }

    fn signalling_violations(&self, party: usize, out: &mut Vec<Violation>) {
        let shape = &self.shape;
        let n = shape.parties();
        if shape.inputs(party) < 2 {
            return;
        }
        let others: Vec<usize> = (0..n).filter(|&k| k != party).collect();
        let other_inputs = MixedRadix::new(others.iter().map(|&k| shape.inputs(k)).collect());
        for xo in other_inputs {
            let radices: Vec<usize> = others
                .iter()
                .zip(&xo)
                .map(|(&k, &x)| shape.outputs(k, x))
                .collect();
            for ao in MixedRadix::new(radices) {
                let sum_for = |xk: usize| -> Rational {
                    let mut inputs = vec![0; n];
                    let mut outputs = vec![0; n];
                    for (i, &k) in others.iter().enumerate() {
                        inputs[k] = xo[i];
                        outputs[k] = ao[i];
                    }
                    inputs[party] = xk;
                    (0..shape.outputs(party, xk))
                        .map(|a| {
                            outputs[party] = a;
                            self.table[shape.index(&outputs, &inputs)].clone()
                        })
                        .sum()
                };
                let reference = sum_for(0);
                for xk in 1..shape.inputs(party) {
                    let s = sum_for(xk);
                    if s != reference {
                        out.push(Violation::Signalling {
                            party,
                            input_a: 0,
                            input_b: xk,
                            other_outputs: ao.clone(),
                            other_inputs: xo.clone(),
                            sum_a: reference.clone(),
                            sum_b: s,
                        });
                    }
                }
            }
        }
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_ok()
    }

    pub fn ensure_valid(&self) -> Result<()> {
        let report = self.validate();
        match report.violations.first() {
            None => Ok(()),
            Some(first) => Err(Error::InvalidBox {
                count: report.violations.len(),
                first: first.to_string(),
            }),
        }
    }

    /// Box on `parties` (kept in ascending order), summing out the rest.
    /// Dropped parties are fixed to input 0, which is sound by no-signalling.
    pub fn marginal(&self, parties: &[usize]) -> Result<CorrBox> {
        self.ensure_valid()?;
        self.marginal_unchecked(parties)
    }

    pub(crate) fn marginal_unchecked(&self, parties: &[usize]) -> Result<CorrBox> {
        let shape = &self.shape;
        let mut keep: Vec<usize> = parties.to_vec();
        keep.sort_unstable();
        keep.dedup();
        if keep.is_empty() || keep.iter().any(|&k| k >= shape.parties()) {
            return Err(Error::Parameter(format!(
                "party subset {parties:?} invalid for {} parties",
                shape.parties()
            )));
        }
        let sub = shape.sub_shape(&keep)?;
        let mut table = vec![rational::zero(); sub.table_len()];
        for (i, v) in self.table.iter().enumerate() {
            let (a, x) = shape.entry(i);
            let dropped_at_zero = (0..shape.parties())
                .filter(|k| !keep.contains(k))
                .all(|k| x[k] == 0);
            if !dropped_at_zero {
                continue;
            }
            let ka: Vec<usize> = keep.iter().map(|&k| a[k]).collect();
            let kx: Vec<usize> = keep.iter().map(|&k| x[k]).collect();
            table[sub.index(&ka, &kx)] += v;
        }
        CorrBox::new(sub, table)
    }

    /// Mixture `Σ w_i b_i`; weights must be nonnegative and sum to one.
    pub fn mixture(parts: &[(Rational, &CorrBox)]) -> Result<CorrBox> {
        let (_, first) = parts
            .first()
            .ok_or_else(|| Error::Parameter("empty mixture".into()))?;
        let total: Rational = parts.iter().map(|(w, _)| w.clone()).sum();
        if !total.is_one() || parts.iter().any(|(w, _)| w.is_negative()) {
            return Err(Error::Parameter("mixture weights must be a distribution".into()));
        }
        let mut table = vec![rational::zero(); first.table.len()];
        for (w, b) in parts {
            if b.shape != first.shape {
                return Err(Error::ShapeMismatch("mixture of different shapes".into()));
            }
            for (t, v) in table.iter_mut().zip(&b.table) {
                *t += w * v;
            }
        }
        CorrBox::new(first.shape.clone(), table)
    }

    /// Runs both boxes in parallel: per party the composite input is
    /// `x1 * M0 + x0` and the composite output `a1 * d0 + a0`, where index 0
    /// refers to `self` and 1 to `other`.
    pub fn product(&self, other: &CorrBox) -> Result<CorrBox> {
        let (s0, s1) = (&self.shape, &other.shape);
        if s0.parties() != s1.parties() {
            return Err(Error::ShapeMismatch(format!(
                "product of a {}-party and a {}-party box",
                s0.parties(),
                s1.parties()
            )));
        }
        let n = s0.parties();
        let outputs: Vec<Vec<usize>> = (0..n)
            .map(|k| {
                let (m0, m1) = (s0.inputs(k), s1.inputs(k));
                (0..m0 * m1)
                    .map(|x| s0.outputs(k, x % m0) * s1.outputs(k, x / m0))
                    .collect()
            })
            .collect();
        let shape = BoxShape::new(outputs)?;
        Ok(CorrBox::from_fn(shape, |a, x| {
            let mut a0 = vec![0; n];
            let mut a1 = vec![0; n];
            let mut x0 = vec![0; n];
            let mut x1 = vec![0; n];
            for k in 0..n {
                let m0 = s0.inputs(k);
                x0[k] = x[k] % m0;
                x1[k] = x[k] / m0;
                let d0 = s0.outputs(k, x0[k]);
                a0[k] = a[k] % d0;
                a1[k] = a[k] / d0;
            }
            self.get(&a0, &x0) * other.get(&a1, &x1)
        }))
    }

    /// Bipartite only: for every inputs `(x, y)` and output `a` of one party
    /// with positive marginal, exactly one output of the other party has
    /// positive joint probability.
    pub fn has_unique_completion(&self) -> Result<bool> {
        let shape = &self.shape;
        if shape.parties() != 2 {
            return Err(Error::ShapeMismatch(format!(
                "unique completion needs a bipartite box, got {} parties",
                shape.parties()
            )));
        }
        for x in 0..shape.inputs(0) {
            for y in 0..shape.inputs(1) {
                let (da, db) = (shape.outputs(0, x), shape.outputs(1, y));
                for a in 0..da {
                    let support = (0..db)
                        .filter(|&b| self.get(&[a, b], &[x, y]).is_positive())
                        .count();
                    let marginal_positive = (0..db).any(|b| self.get(&[a, b], &[x, y]).is_positive());
                    if marginal_positive && support != 1 {
                        return Ok(false);
                    }
                }
                for b in 0..db {
                    let support = (0..da)
                        .filter(|&a| self.get(&[a, b], &[x, y]).is_positive())
                        .count();
                    if support > 1 {
                        return Ok(false);
                    }
                }
            }
        }
        Ok(true)
    }

    pub fn is_deterministic(&self) -> bool {
        self.table.iter().all(|v| v.is_zero() || v.is_one())
    }

    /// Marginal probability that `party` outputs `output` on `input`.
    pub fn party_marginal(&self, party: usize, output: usize, input: usize) -> Rational {
        let shape = &self.shape;
        let mut inputs = vec![0; shape.parties()];
        inputs[party] = input;
        let j = shape.encode_inputs(&inputs);
        let off = shape.block_offset(j);
        (0..shape.block_len(j))
            .filter(|&l| shape.entry(off + l).0[party] == output)
            .map(|l| self.table[off + l].clone())
            .sum()
    }

    /// Drops outputs: `keep[k][x]` lists the outputs of party `k` on input
    /// `x` that survive, in their new order.
    pub fn restrict_outputs(&self, keep: &[Vec<Vec<usize>>]) -> Result<CorrBox> {
        let shape = &self.shape;
        let outputs: Vec<Vec<usize>> = keep
            .iter()
            .map(|per_input| per_input.iter().map(Vec::len).collect())
            .collect();
        let sub = BoxShape::new(outputs)?;
        if sub.output_table().iter().map(Vec::len).collect::<Vec<_>>()
            != shape.output_table().iter().map(Vec::len).collect::<Vec<_>>()
        {
            return Err(Error::ShapeMismatch("restriction must keep every input".into()));
        }
        Ok(CorrBox::from_fn(sub, |a, x| {
            let orig: Vec<usize> = (0..a.len()).map(|k| keep[k][x[k]][a[k]]).collect();
            self.get(&orig, x).clone()
        }))
    }

    /// Embeds into a larger shape: output `a` of party `k` on input `x` is
    /// sent to `maps[k][x][a]`; all other outputs get probability zero.
    pub fn lift(&self, target: &BoxShape, maps: &[Vec<Vec<usize>>]) -> Result<CorrBox> {
        let shape = &self.shape;
        if target.parties() != shape.parties()
            || (0..shape.parties()).any(|k| target.inputs(k) != shape.inputs(k))
        {
            return Err(Error::ShapeMismatch("lift target must keep parties and inputs".into()));
        }
        let mut table = vec![rational::zero(); target.table_len()];
        for (i, v) in self.table.iter().enumerate() {
            let (a, x) = shape.entry(i);
            let mapped: Vec<usize> = (0..a.len()).map(|k| maps[k][x[k]][a[k]]).collect();
            if mapped
                .iter()
                .enumerate()
                .any(|(k, &m)| m >= target.outputs(k, x[k]))
            {
                return Err(Error::Parameter("lift map out of range".into()));
            }
            table[target.index(&mapped, &x)] = v.clone();
        }
        CorrBox::new(target.clone(), table)
    }

    /// Table scaled by the least common denominator, as integers.
    pub fn integer_key(&self) -> Vec<BigInt> {
        let lcm = self
            .table
            .iter()
            .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
        self.table
            .iter()
            .map(|v| v.numer() * (&lcm / v.denom()))
            .collect()
    }

    /// Lexicographic comparison of tables (shapes compared first).
    pub fn cmp_table(&self, other: &CorrBox) -> Ordering {
        self.shape
            .output_table()
            .cmp(other.shape.output_table())
            .then_with(|| self.table.cmp(&other.table))
    }

    /// Permutes entries: entry `i` moves to position `perm[i]`.
    pub(crate) fn permuted(&self, shape: BoxShape, perm: &[usize]) -> CorrBox {
        let mut table = vec![rational::zero(); self.table.len()];
        for (i, v) in self.table.iter().enumerate() {
            table[perm[i]] = v.clone();
        }
        CorrBox { shape, table }
    }
}

impl PartialOrd for CorrBox {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for CorrBox {
    fn cmp(&self, other: &Self) -> Ordering {
        self.cmp_table(other)
    }
}
