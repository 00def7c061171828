//! Box shapes and the canonical mixed-radix table layout.
//!
//! A table is laid out block by block: one block per joint input, joint
//! inputs enumerated in mixed radix with party 0 most significant. Inside a
//! block the joint outputs are enumerated the same way, so outputs vary
//! fastest overall.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BoxShape {
    /// `outputs[k][x]` is the number of outputs of party `k` on input `x`.
    outputs: Vec<Vec<usize>>,
    /// Start of each joint-input block, plus the total length at the end.
    offsets: Vec<usize>,
}

impl BoxShape {
    pub fn new(outputs: Vec<Vec<usize>>) -> Result<Self> {
        if outputs.is_empty() {
            return Err(Error::InvalidShape("at least one party required".into()));
        }
        for (k, outs) in outputs.iter().enumerate() {
            if outs.is_empty() {
                return Err(Error::InvalidShape(format!("party {k} has no inputs")));
            }
            if let Some(x) = outs.iter().position(|&d| d == 0) {
                return Err(Error::InvalidShape(format!(
                    "party {k} input {x} has no outputs"
                )));
            }
        }
        let joint: usize = outputs.iter().map(Vec::len).product();
        let mut offsets = Vec::with_capacity(joint + 1);
        let mut acc = 0usize;
        let mut inputs = vec![0usize; outputs.len()];
        for _ in 0..joint {
            offsets.push(acc);
            let block: usize = inputs
                .iter()
                .zip(&outputs)
                .map(|(&x, outs)| outs[x])
                .product();
            acc = acc
                .checked_add(block)
                .ok_or_else(|| Error::InvalidShape("table too large".into()))?;
            increment(&mut inputs, |k| outputs[k].len());
        }
        offsets.push(acc);
        Ok(BoxShape { outputs, offsets })
    }

    /// `parties` parties, each with `inputs` inputs of `outputs` outputs.
    pub fn uniform(parties: usize, inputs: usize, outputs: usize) -> Result<Self> {
        Self::new(vec![vec![outputs; inputs]; parties])
    }

    pub fn bipartite(a_outputs: Vec<usize>, b_outputs: Vec<usize>) -> Result<Self> {
        Self::new(vec![a_outputs, b_outputs])
    }

    pub fn parties(&self) -> usize {
        self.outputs.len()
    }

    pub fn inputs(&self, party: usize) -> usize {
        self.outputs[party].len()
    }

    pub fn outputs(&self, party: usize, input: usize) -> usize {
        self.outputs[party][input]
    }

    pub fn party_outputs(&self, party: usize) -> &[usize] {
        &self.outputs[party]
    }

    pub fn output_table(&self) -> &[Vec<usize>] {
        &self.outputs
    }

    pub fn max_outputs(&self, party: usize) -> usize {
        self.outputs[party].iter().copied().max().unwrap_or(0)
    }

    pub fn is_binary(&self) -> bool {
        self.outputs.iter().flatten().all(|&d| d == 2)
    }

    pub fn joint_inputs(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn table_len(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    pub fn block_offset(&self, joint_input: usize) -> usize {
        self.offsets[joint_input]
    }

    pub fn block_len(&self, joint_input: usize) -> usize {
        self.offsets[joint_input + 1] - self.offsets[joint_input]
    }

    pub fn encode_inputs(&self, inputs: &[usize]) -> usize {
        inputs
            .iter()
            .zip(&self.outputs)
            .fold(0, |acc, (&x, outs)| acc * outs.len() + x)
    }

    pub fn decode_inputs(&self, mut joint: usize) -> Vec<usize> {
        let mut xs = vec![0; self.parties()];
        for k in (0..self.parties()).rev() {
            let m = self.inputs(k);
            xs[k] = joint % m;
            joint /= m;
        }
        xs
    }

    /// Flat index of `p(outputs | inputs)`.
    pub fn index(&self, outputs: &[usize], inputs: &[usize]) -> usize {
        let j = self.encode_inputs(inputs);
        let local = outputs
            .iter()
            .zip(inputs)
            .zip(&self.outputs)
            .fold(0, |acc, ((&a, &x), outs)| acc * outs[x] + a);
        self.offsets[j] + local
    }

    /// Decodes a flat index into `(outputs, inputs)`.
    pub fn entry(&self, index: usize) -> (Vec<usize>, Vec<usize>) {
        let j = match self.offsets.binary_search(&index) {
            Ok(mut j) => {
                // skip empty blocks (cannot happen for valid shapes, kept for safety)
                while self.offsets[j + 1] == index {
                    j += 1;
                }
                j
            }
            Err(j) => j - 1,
        };
        let inputs = self.decode_inputs(j);
        let mut local = index - self.offsets[j];
        let mut outputs = vec![0; self.parties()];
        for k in (0..self.parties()).rev() {
            let d = self.outputs[k][inputs[k]];
            outputs[k] = local % d;
            local /= d;
        }
        (outputs, inputs)
    }

    /// All `(outputs, inputs)` pairs in canonical table order.
    pub fn entries(&self) -> impl Iterator<Item = (Vec<usize>, Vec<usize>)> + '_ {
        (0..self.joint_inputs()).flat_map(move |j| {
            let inputs = self.decode_inputs(j);
            let radices: Vec<usize> = inputs
                .iter()
                .enumerate()
                .map(|(k, &x)| self.outputs[k][x])
                .collect();
            MixedRadix::new(radices).map(move |outs| (outs, inputs.clone()))
        })
    }

    /// All joint inputs in canonical order.
    pub fn input_tuples(&self) -> MixedRadix {
        MixedRadix::new(self.outputs.iter().map(Vec::len).collect())
    }

    /// Shape restricted to the listed parties, in the listed order.
    pub fn sub_shape(&self, parties: &[usize]) -> Result<Self> {
        BoxShape::new(parties.iter().map(|&k| self.outputs[k].clone()).collect())
    }

    /// Appends the parties of `other` after those of `self`.
    pub fn join(&self, other: &BoxShape) -> Result<Self> {
        let mut outs = self.outputs.clone();
        outs.extend(other.outputs.iter().cloned());
        BoxShape::new(outs)
    }
}

impl fmt::Display for BoxShape {
    /// Extended command-line form, e.g. `2:2,2/2:3,3`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, outs) in self.outputs.iter().enumerate() {
            if k > 0 {
                write!(f, "/")?;
            }
            write!(f, "{}:", outs.len())?;
            for (x, d) in outs.iter().enumerate() {
                if x > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{d}")?;
            }
        }
        Ok(())
    }
}

impl FromStr for BoxShape {
    type Err = Error;

    /// Parties are separated by `/`. Each party is `M` (M inputs, 2 outputs
    /// each), `M,d` (M inputs, d outputs each) or `M:d0,d1,...` (explicit
    /// output count per input).
    fn from_str(s: &str) -> Result<Self> {
        let bad = |msg: &str| Error::Parse(format!("shape {s:?}: {msg}"));
        let num = |t: &str| -> Result<usize> {
            t.trim()
                .parse::<usize>()
                .map_err(|_| bad(&format!("{t:?} is not a count")))
        };
        let mut outputs = Vec::new();
        for seg in s.trim().split('/') {
            if let Some((m, outs)) = seg.split_once(':') {
                let m = num(m)?;
                let outs = outs.split(',').map(num).collect::<Result<Vec<_>>>()?;
                if outs.len() != m {
                    return Err(bad(&format!(
                        "party declares {m} inputs but lists {} output counts",
                        outs.len()
                    )));
                }
                outputs.push(outs);
            } else {
                let parts = seg.split(',').map(num).collect::<Result<Vec<_>>>()?;
                match parts.as_slice() {
                    [m] => outputs.push(vec![2; *m]),
                    [m, d] => outputs.push(vec![*d; *m]),
                    _ => return Err(bad("party must be M, M,d or M:d0,d1,...")),
                }
            }
        }
        BoxShape::new(outputs)
    }
}

/// Odometer over a mixed-radix tuple space, last digit fastest.
#[derive(Debug, Clone)]
pub struct MixedRadix {
    radices: Vec<usize>,
    current: Option<Vec<usize>>,
}

impl MixedRadix {
    pub fn new(radices: Vec<usize>) -> Self {
        let current = if radices.iter().all(|&r| r > 0) {
            Some(vec![0; radices.len()])
        } else {
            None
        };
        MixedRadix { radices, current }
    }
}

impl Iterator for MixedRadix {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.current.clone()?;
        let cur = self.current.as_mut().unwrap();
        let mut k = cur.len();
        loop {
            if k == 0 {
                self.current = None;
                break;
            }
            k -= 1;
            cur[k] += 1;
            if cur[k] < self.radices[k] {
                break;
            }
            cur[k] = 0;
        }
        Some(out)
    }
}

fn increment(digits: &mut [usize], radix: impl Fn(usize) -> usize) {
    for k in (0..digits.len()).rev() {
        digits[k] += 1;
        if digits[k] < radix(k) {
            return;
        }
        digits[k] = 0;
    }
}
