//! Orbit classification of box lists under the relabelling group.

use std::collections::HashMap;

use num_bigint::BigInt;

use crate::boxes::CorrBox;
use crate::error::{Error, Result};
use crate::relabel::{RelabellingGroup, DEFAULT_GROUP_CAP};
use crate::vertices::VRep;

/// One orbit class of a box list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrbitClass {
    /// Lexicographically smallest table in the full orbit.
    pub representative: CorrBox,
    /// Number of listed boxes in this orbit.
    pub size: usize,
    /// Size of the full orbit, listed or not.
    pub orbit_size: usize,
    /// Indices into the input list, ascending.
    pub members: Vec<usize>,
}

/// Classifies vertices under local relabellings and party permutations.
/// The vertex list must be complete.
pub fn classify_vertices(v: &VRep) -> Result<Vec<OrbitClass>> {
    if !v.complete {
        return Err(Error::Parameter(
            "vertex list is incomplete; classify the boxes individually".into(),
        ));
    }
    classify_boxes(&v.vertices, true)
}

/// Partitions `boxes` (all of one shape) into orbits. Classes are sorted by
/// representative.
pub fn classify_boxes(boxes: &[CorrBox], allow_party_permutation: bool) -> Result<Vec<OrbitClass>> {
    let Some(first) = boxes.first() else {
        return Ok(Vec::new());
    };
    let shape = first.shape().clone();
    if let Some(b) = boxes.iter().find(|b| b.shape() != &shape) {
        return Err(Error::ShapeMismatch(format!(
            "cannot classify boxes of shapes {shape} and {}",
            b.shape()
        )));
    }
    let group = RelabellingGroup::new(&shape, allow_party_permutation);
    let perms = group.table_permutations(DEFAULT_GROUP_CAP)?;

    let keys: Vec<Vec<BigInt>> = boxes.iter().map(CorrBox::integer_key).collect();
    let mut index: HashMap<&[BigInt], Vec<usize>> = HashMap::new();
    for (i, k) in keys.iter().enumerate() {
        index.entry(k.as_slice()).or_default().push(i);
    }
    let mut assigned = vec![false; boxes.len()];
    let mut classes = Vec::new();
    for i in 0..boxes.len() {
        if assigned[i] {
            continue;
        }
        let key = &keys[i];
        let mut orbit: Vec<Vec<BigInt>> = perms
            .iter()
            .map(|perm| {
                let mut img = vec![BigInt::default(); key.len()];
                for (j, v) in key.iter().enumerate() {
                    img[perm[j]] = v.clone();
                }
                img
            })
            .collect();
        orbit.sort();
        orbit.dedup();
        let mut members = Vec::new();
        for img in &orbit {
            if let Some(found) = index.get(img.as_slice()) {
                for &m in found {
                    if !assigned[m] {
                        assigned[m] = true;
                        members.push(m);
                    }
                }
            }
        }
        members.sort_unstable();
        // The smallest integer key is the smallest table: every image shares
        // the same common denominator.
        let min_perm = perms
            .iter()
            .min_by(|p, q| image_cmp(key, p, q))
            .expect("group contains the identity");
        let representative = boxes[i].permuted(shape.clone(), min_perm);
        classes.push(OrbitClass {
            representative,
            size: members.len(),
            orbit_size: orbit.len(),
            members,
        });
    }
    classes.sort_by(|a, b| a.representative.cmp_table(&b.representative));
    Ok(classes)
}

fn image_cmp(key: &[BigInt], p: &[usize], q: &[usize]) -> std::cmp::Ordering {
    let mut ip = vec![0usize; p.len()];
    let mut iq = vec![0usize; q.len()];
    for j in 0..p.len() {
        ip[p[j]] = j;
        iq[q[j]] = j;
    }
    for t in 0..p.len() {
        let o = key[ip[t]].cmp(&key[iq[t]]);
        if o.is_ne() {
            return o;
        }
    }
    std::cmp::Ordering::Equal
}
