//! Wirings: per-party adaptive programs over component boxes, optionally
//! with shared randomness and one-way messages.
//!
//! Every value a party computes is a lookup table over its scope: the
//! protocol input, then the shared random value (when present), then the
//! values produced by its earlier items in order (component outputs and
//! received messages). Tables are indexed in mixed radix, last scope value
//! fastest; a component output occupies a digit of radix equal to the
//! largest output count of that side.

use serde::{Deserialize, Serialize};

use crate::boxes::CorrBox;
use crate::error::{Error, Result};
use crate::rational::{self, Rational};
use crate::shape::{BoxShape, MixedRadix};

use num_traits::{One, Signed, Zero};

/// Component-output assignments enumerated per joint input before giving up.
pub const ASSIGNMENT_CAP: u64 = 1 << 26;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lookup {
    pub table: Vec<usize>,
}

impl Lookup {
    pub fn from_fn(radices: &[usize], f: impl Fn(&[usize]) -> usize) -> Self {
        Lookup {
            table: MixedRadix::new(radices.to_vec()).map(|v| f(&v)).collect(),
        }
    }

    fn get(&self, radices: &[usize], values: &[usize]) -> usize {
        let mut idx = 0;
        for (r, v) in radices.iter().zip(values) {
            idx = idx * r + v;
        }
        self.table[idx]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "lowercase")]
pub enum Item {
    /// Feed `input(scope)` into this party's `side` of `component`; the
    /// output joins the scope.
    Use { component: usize, side: usize, input: Lookup },
    /// Send `value(scope)` as message `message`.
    Send { message: usize, value: Lookup },
    /// Wait for message `message`; its value joins the scope.
    Receive { message: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartyProgram {
    pub items: Vec<Item>,
    pub output: Lookup,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub sender: usize,
    pub receiver: usize,
    pub bits: u32,
}

/// A component box of the given shape; side `s` is held by protocol party
/// `parties[s]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentSlot {
    pub shape: BoxShape,
    pub parties: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Wiring {
    /// Shape of the simulated box.
    pub shape: BoxShape,
    pub components: Vec<ComponentSlot>,
    /// Distribution of the shared random value; empty when there is none.
    pub shared: Vec<Rational>,
    pub messages: Vec<Message>,
    pub programs: Vec<PartyProgram>,
}

/// A wiring that uses messages.
pub type CommProtocol = Wiring;

impl Wiring {
    /// Total bits sent.
    pub fn bits(&self) -> u32 {
        self.messages.iter().map(|m| m.bits).sum()
    }

    fn base_scope(&self, party: usize) -> Vec<usize> {
        let mut s = vec![self.shape.inputs(party)];
        if !self.shared.is_empty() {
            s.push(self.shared.len());
        }
        s
    }

    /// Scope radices before each item and at the output.
    fn scopes(&self, party: usize) -> Result<(Vec<Vec<usize>>, Vec<usize>)> {
        let mut scope = self.base_scope(party);
        let mut before = Vec::new();
        for item in &self.programs[party].items {
            before.push(scope.clone());
            match item {
                Item::Use { component, side, .. } => {
                    let slot = self
                        .components
                        .get(*component)
                        .ok_or_else(|| wiring_err(format!("party {party} uses missing component {component}")))?;
                    if *side >= slot.shape.parties() {
                        return Err(wiring_err(format!(
                            "component {component} has no side {side}"
                        )));
                    }
                    scope.push(slot.shape.max_outputs(*side));
                }
                Item::Receive { message } => {
                    let m = self
                        .messages
                        .get(*message)
                        .ok_or_else(|| wiring_err(format!("party {party} receives missing message {message}")))?;
                    scope.push(message_values(m)?);
                }
                Item::Send { .. } => {}
            }
        }
        Ok((before, scope))
    }

    /// Checks the structural invariants.
    pub fn check(&self) -> Result<()> {
        let n = self.shape.parties();
        if self.programs.len() != n {
            return Err(wiring_err(format!(
                "{} party programs for a {n}-party box",
                self.programs.len()
            )));
        }
        if !self.shared.is_empty() {
            if self.shared.iter().any(|q| q.is_negative())
                || !self.shared.iter().cloned().sum::<Rational>().is_one()
            {
                return Err(wiring_err("shared distribution must be nonnegative and sum to 1".into()));
            }
        }
        let mut used: Vec<Vec<usize>> = self
            .components
            .iter()
            .map(|c| vec![0; c.parties.len()])
            .collect();
        for (c, slot) in self.components.iter().enumerate() {
            if slot.parties.len() != slot.shape.parties() {
                return Err(wiring_err(format!(
                    "component {c} has {} sides but {} party assignments",
                    slot.shape.parties(),
                    slot.parties.len()
                )));
            }
            if let Some(&p) = slot.parties.iter().find(|&&p| p >= n) {
                return Err(wiring_err(format!("component {c} assigned to missing party {p}")));
            }
        }
        let mut sent = vec![0usize; self.messages.len()];
        let mut received = vec![0usize; self.messages.len()];
        for (k, prog) in self.programs.iter().enumerate() {
            let (before, at_output) = self.scopes(k)?;
            for (item, scope) in prog.items.iter().zip(&before) {
                match item {
                    Item::Use { component, side, input } => {
                        let slot = &self.components[*component];
                        if slot.parties[*side] != k {
                            return Err(wiring_err(format!(
                                "party {k} uses side {side} of component {component}, which belongs to party {}",
                                slot.parties[*side]
                            )));
                        }
                        used[*component][*side] += 1;
                        check_lookup(input, scope, slot.shape.inputs(*side), &format!("party {k} input to component {component}"))?;
                    }
                    Item::Send { message, value } => {
                        let m = self
                            .messages
                            .get(*message)
                            .ok_or_else(|| wiring_err(format!("party {k} sends missing message {message}")))?;
                        if m.sender != k {
                            return Err(wiring_err(format!("message {message} is not sent by party {k}")));
                        }
                        sent[*message] += 1;
                        check_lookup(value, scope, message_values(m)?, &format!("message {message}"))?;
                    }
                    Item::Receive { message } => {
                        if self.messages[*message].receiver != k {
                            return Err(wiring_err(format!("message {message} is not addressed to party {k}")));
                        }
                        received[*message] += 1;
                    }
                }
            }
            let out = &prog.output;
            let expected: usize = at_output.iter().product();
            if out.table.len() != expected {
                return Err(wiring_err(format!(
                    "party {k} output table has {} entries, scope needs {expected}",
                    out.table.len()
                )));
            }
            // the first scope digit is the protocol input, the slowest one
            let block = expected / self.shape.inputs(k);
            for (i, &v) in out.table.iter().enumerate() {
                let x = i / block;
                if v >= self.shape.outputs(k, x) {
                    return Err(wiring_err(format!(
                        "party {k} outputs {v} on input {x}, which has {} outputs",
                        self.shape.outputs(k, x)
                    )));
                }
            }
        }
        for (c, sides) in used.iter().enumerate() {
            if let Some(s) = sides.iter().position(|&u| u != 1) {
                return Err(wiring_err(format!(
                    "side {s} of component {c} is used {} times (must be exactly once)",
                    sides[s]
                )));
            }
        }
        for (m, msg) in self.messages.iter().enumerate() {
            if msg.sender == msg.receiver || msg.sender >= n || msg.receiver >= n {
                return Err(wiring_err(format!("message {m} has invalid endpoints")));
            }
            if sent[m] != 1 || received[m] != 1 {
                return Err(wiring_err(format!(
                    "message {m} is sent {} and received {} times (must be once each)",
                    sent[m], received[m]
                )));
            }
        }
        self.check_acyclic()
    }

    /// Messages must admit an order in which every receive follows its send.
    fn check_acyclic(&self) -> Result<()> {
        let mut pos = vec![0usize; self.programs.len()];
        let mut delivered = vec![false; self.messages.len()];
        loop {
            let mut progress = false;
            for (k, prog) in self.programs.iter().enumerate() {
                while pos[k] < prog.items.len() {
                    match &prog.items[pos[k]] {
                        Item::Receive { message } if !delivered[*message] => break,
                        Item::Send { message, .. } => delivered[*message] = true,
                        _ => {}
                    }
                    pos[k] += 1;
                    progress = true;
                }
            }
            if pos.iter().zip(&self.programs).all(|(p, prog)| *p == prog.items.len()) {
                return Ok(());
            }
            if !progress {
                return Err(wiring_err("message dependencies form a cycle".into()));
            }
        }
    }
}

fn message_values(m: &Message) -> Result<usize> {
    if m.bits > 16 {
        return Err(wiring_err(format!("messages wider than 16 bits are not supported ({})", m.bits)));
    }
    Ok(1usize << m.bits)
}

fn check_lookup(l: &Lookup, scope: &[usize], range: usize, what: &str) -> Result<()> {
    let expected: usize = scope.iter().product();
    if l.table.len() != expected {
        return Err(wiring_err(format!(
            "{what}: table has {} entries, scope needs {expected}",
            l.table.len()
        )));
    }
    if let Some(v) = l.table.iter().find(|&&v| v >= range) {
        return Err(wiring_err(format!("{what}: value {v} out of range 0..{range}")));
    }
    Ok(())
}

fn wiring_err(msg: String) -> Error {
    Error::Wiring(msg)
}

/// Evaluates a wiring without messages. Component boxes must be valid.
pub fn evaluate_wiring(w: &Wiring, boxes: &[CorrBox]) -> Result<CorrBox> {
    if !w.messages.is_empty() {
        return Err(wiring_err("wiring uses messages; evaluate it as a communication protocol".into()));
    }
    evaluate(w, boxes)
}

/// Evaluates a protocol with messages; returns the simulated box (which
/// may signal) and the number of bits sent.
pub fn evaluate_comm_protocol(p: &CommProtocol, boxes: &[CorrBox]) -> Result<(CorrBox, u32)> {
    Ok((evaluate(p, boxes)?, p.bits()))
}

fn evaluate(w: &Wiring, boxes: &[CorrBox]) -> Result<CorrBox> {
    w.check()?;
    if boxes.len() != w.components.len() {
        return Err(wiring_err(format!(
            "{} component boxes supplied, wiring has {} slots",
            boxes.len(),
            w.components.len()
        )));
    }
    for (c, (b, slot)) in boxes.iter().zip(&w.components).enumerate() {
        if b.shape() != &slot.shape {
            return Err(wiring_err(format!(
                "component {c} has shape {}, slot expects {}",
                b.shape(),
                slot.shape
            )));
        }
        b.ensure_valid()
            .map_err(|e| wiring_err(format!("component {c} rejected: {e}")))?;
    }

    // Digit layout of the component-output enumeration.
    let mut radices = Vec::new();
    let mut digit_of: Vec<Vec<usize>> = Vec::new();
    for slot in &w.components {
        let mut sides = Vec::new();
        for s in 0..slot.shape.parties() {
            sides.push(radices.len());
            radices.push(slot.shape.max_outputs(s));
        }
        digit_of.push(sides);
    }
    let combos = radices
        .iter()
        .try_fold(1u64, |acc, &r| acc.checked_mul(r as u64));
    if combos.map_or(true, |c| c > ASSIGNMENT_CAP) {
        return Err(Error::ResourceCap(format!(
            "more than {ASSIGNMENT_CAP} component output assignments"
        )));
    }

    let scopes: Vec<(Vec<Vec<usize>>, Vec<usize>)> =
        (0..w.shape.parties()).map(|k| w.scopes(k)).collect::<Result<_>>()?;
    let shared: Vec<Rational> = if w.shared.is_empty() {
        vec![rational::one()]
    } else {
        w.shared.clone()
    };

    let mut table = vec![rational::zero(); w.shape.table_len()];
    let mut induced: Vec<Vec<usize>> = w.components.iter().map(|c| vec![0; c.parties.len()]).collect();
    for x in w.shape.input_tuples() {
        for (lambda, q) in shared.iter().enumerate() {
            if q.is_zero() {
                continue;
            }
            for outs in MixedRadix::new(radices.clone()) {
                let a = run(w, &scopes, &x, lambda, &outs, &digit_of, &mut induced)?;
                let mut weight = q.clone();
                for (c, b) in boxes.iter().enumerate() {
                    let shape = b.shape();
                    let o: Vec<usize> = digit_of[c].iter().map(|&d| outs[d]).collect();
                    let i = &induced[c];
                    if (0..o.len()).any(|s| o[s] >= shape.outputs(s, i[s])) {
                        weight = rational::zero();
                        break;
                    }
                    let p = b.get(&o, i);
                    if p.is_zero() {
                        weight = rational::zero();
                        break;
                    }
                    weight *= p;
                }
                if !weight.is_zero() {
                    table[w.shape.index(&a, &x)] += weight;
                }
            }
        }
    }
    CorrBox::new(w.shape.clone(), table)
}

/// Runs every party's program for fixed inputs, shared value and component
/// outputs. Records the inputs fed to each component side in `induced` and
/// returns the protocol outputs.
fn run(
    w: &Wiring,
    scopes: &[(Vec<Vec<usize>>, Vec<usize>)],
    x: &[usize],
    lambda: usize,
    outs: &[usize],
    digit_of: &[Vec<usize>],
    induced: &mut [Vec<usize>],
) -> Result<Vec<usize>> {
    let n = w.shape.parties();
    let mut values: Vec<Vec<usize>> = (0..n)
        .map(|k| {
            let mut v = vec![x[k]];
            if !w.shared.is_empty() {
                v.push(lambda);
            }
            v
        })
        .collect();
    let mut pos = vec![0usize; n];
    let mut mailbox: Vec<Option<usize>> = vec![None; w.messages.len()];
    loop {
        let mut progress = false;
        for k in 0..n {
            let prog = &w.programs[k];
            while pos[k] < prog.items.len() {
                let scope = &scopes[k].0[pos[k]];
                match &prog.items[pos[k]] {
                    Item::Use { component, side, input } => {
                        induced[*component][*side] = input.get(scope, &values[k]);
                        values[k].push(outs[digit_of[*component][*side]]);
                    }
                    Item::Send { message, value } => {
                        mailbox[*message] = Some(value.get(scope, &values[k]));
                    }
                    Item::Receive { message } => match mailbox[*message] {
                        Some(v) => values[k].push(v),
                        None => break,
                    },
                }
                pos[k] += 1;
                progress = true;
            }
        }
        if (0..n).all(|k| pos[k] == w.programs[k].items.len()) {
            break;
        }
        if !progress {
            return Err(wiring_err("message dependencies form a cycle".into()));
        }
    }
    Ok((0..n)
        .map(|k| w.programs[k].output.get(&scopes[k].1, &values[k]))
        .collect())
}

/// Largest total-variation distance between `p` and `q` over joint inputs.
pub fn max_tv_distance(p: &CorrBox, q: &CorrBox) -> Result<Rational> {
    if p.shape() != q.shape() {
        return Err(Error::ShapeMismatch(format!("{} vs {}", p.shape(), q.shape())));
    }
    let shape = p.shape();
    let half = rational::ratio(1, 2);
    Ok((0..shape.joint_inputs())
        .map(|j| {
            let off = shape.block_offset(j);
            let s: Rational = (off..off + shape.block_len(j))
                .map(|i| (&p.table()[i] - &q.table()[i]).abs())
                .sum();
            s * &half
        })
        .max()
        .unwrap_or_else(rational::zero))
}
