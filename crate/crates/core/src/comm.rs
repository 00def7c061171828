//! One-way communication cost of simulating a bipartite box with shared
//! randomness.

use std::collections::HashSet;

use crate::boxes::CorrBox;
use crate::error::{Error, Result};
use crate::locality::{find_mixture, DeterministicStrategy, LocalModel, StrategyKind, STRATEGY_CAP};
use crate::shape::{BoxShape, MixedRadix};

/// Deterministic strategies where Alice sends a `bits`-bit message
/// `m(X)` and outputs `a(X)`, and Bob outputs `b(Y, m)`. Duplicate boxes
/// are dropped.
pub fn one_way_strategies(shape: &BoxShape, bits: u32) -> Result<Vec<DeterministicStrategy>> {
    if shape.parties() != 2 {
        return Err(Error::ShapeMismatch(format!(
            "one-way communication needs two parties, got {shape}"
        )));
    }
    if bits > 8 {
        return Err(Error::ResourceCap(format!("{bits}-bit messages are too many to enumerate")));
    }
    let messages = 1usize << bits;
    let (ma, mb) = (shape.inputs(0), shape.inputs(1));
    // Alice never needs more distinct messages than she has inputs.
    let useful = messages.min(ma);
    let alice_count = (useful as u128).pow(ma as u32)
        * shape.party_outputs(0).iter().map(|&d| d as u128).product::<u128>();
    let bob_count = shape
        .party_outputs(1)
        .iter()
        .map(|&d| (d as u128).pow(useful as u32))
        .product::<u128>();
    if alice_count.saturating_mul(bob_count) > STRATEGY_CAP as u128 {
        return Err(Error::ResourceCap(format!(
            "more than {STRATEGY_CAP} one-way strategies for {shape} with {bits} bits"
        )));
    }
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    let bob_radices: Vec<usize> = (0..mb)
        .flat_map(|y| std::iter::repeat(shape.outputs(1, y)).take(useful))
        .collect();
    for message in MixedRadix::new(vec![useful; ma]) {
        for alice in MixedRadix::new(shape.party_outputs(0).to_vec()) {
            for bd in MixedRadix::new(bob_radices.clone()) {
                let bob: Vec<Vec<usize>> = bd.chunks(useful).map(<[usize]>::to_vec).collect();
                let (m, a, b) = (message.clone(), alice.clone(), bob.clone());
                let s = DeterministicStrategy::from_fn(
                    StrategyKind::OneWay {
                        message: message.clone(),
                        alice: alice.clone(),
                        bob,
                    },
                    shape,
                    |x| vec![a[x[0]], b[x[1]][m[x[0]]]],
                );
                if seen.insert(s.table.integer_key()) {
                    out.push(s);
                }
            }
        }
    }
    Ok(out)
}

/// Smallest `c ≤ max_bits` such that `target` is a mixture of one-way
/// `c`-bit deterministic strategies, with the mixture; `None` if there is
/// none up to `max_bits`.
pub fn min_oneway_comm_with_sr(target: &CorrBox, max_bits: u32) -> Result<Option<(u32, LocalModel)>> {
    let shape = target.shape();
    if shape.parties() != 2 {
        return Err(Error::ShapeMismatch(format!(
            "one-way communication needs two parties, got {shape}"
        )));
    }
    for c in 0..=max_bits {
        let strategies = one_way_strategies(shape, c)?;
        if let Some(model) = find_mixture(target, &strategies)? {
            return Ok(Some((c, model)));
        }
        // More bits than needed to send the whole input add nothing.
        if (1usize << c) >= shape.inputs(0) {
            break;
        }
    }
    Ok(None)
}
