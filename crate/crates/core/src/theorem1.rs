//! Checks the classification of bipartite two-input vertices by enumeration.
//!
//! Every vertex of a bipartite polytope with two inputs per party should be
//! either deterministic or, after discarding outputs that never occur, a
//! relabelled `k`-box. Vertices that use every output are "full-output";
//! the rest should be exactly the liftings of full-output vertices of
//! strictly smaller shapes.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_traits::Zero;

use crate::boxes::CorrBox;
use crate::dd::DdConfig;
use crate::error::{Error, Result};
use crate::families;
use crate::relabel::equivalent_under_relabelling;
use crate::shape::{BoxShape, MixedRadix};
use crate::vertices::ns_vertices;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VertexKind {
    Deterministic,
    /// Equivalent to the `k`-box once unused outputs are dropped.
    KBox { k: usize, full_output: bool },
    /// Matches neither pattern.
    Unexplained,
}

#[derive(Debug, Clone)]
pub struct Theorem1Report {
    pub shape: BoxShape,
    pub vertices: Vec<CorrBox>,
    pub kinds: Vec<VertexKind>,
    /// Number of vertices per `k`.
    pub k_counts: BTreeMap<usize, usize>,
    pub deterministic: usize,
    /// Whether the partial-output vertices coincide with the liftings of
    /// full-output vertices of smaller shapes; `None` when not checked.
    pub liftings_match: Option<bool>,
}

impl Theorem1Report {
    pub fn unexplained(&self) -> Vec<&CorrBox> {
        self.vertices
            .iter()
            .zip(&self.kinds)
            .filter(|(_, k)| **k == VertexKind::Unexplained)
            .map(|(v, _)| v)
            .collect()
    }

    pub fn holds(&self) -> bool {
        let kmax = self.shape.max_outputs(0).min(self.shape.max_outputs(1));
        self.unexplained().is_empty()
            && self.k_counts.keys().all(|&k| k >= 2 && k <= kmax)
            && self.liftings_match != Some(false)
    }
}

/// Outputs of each party and input that occur with nonzero probability.
pub fn used_outputs(b: &CorrBox) -> Vec<Vec<Vec<usize>>> {
    let shape = b.shape();
    (0..shape.parties())
        .map(|k| {
            (0..shape.inputs(k))
                .map(|x| {
                    (0..shape.outputs(k, x))
                        .filter(|&a| !b.party_marginal(k, a, x).is_zero())
                        .collect()
                })
                .collect()
        })
        .collect()
}

pub fn is_full_output(b: &CorrBox) -> bool {
    let shape = b.shape();
    used_outputs(b)
        .iter()
        .enumerate()
        .all(|(k, per_input)| per_input.iter().enumerate().all(|(x, used)| used.len() == shape.outputs(k, x)))
}

/// Classifies one vertex of a bipartite two-input polytope.
pub fn vertex_kind(b: &CorrBox) -> Result<VertexKind> {
    if b.is_deterministic() {
        return Ok(VertexKind::Deterministic);
    }
    let full_output = is_full_output(b);
    let reduced = b.restrict_outputs(&used_outputs(b))?;
    let shape = reduced.shape();
    let k = shape.outputs(0, 0);
    let uniform = (0..2).all(|p| (0..2).all(|x| shape.outputs(p, x) == k));
    if !uniform || k < 2 {
        return Ok(VertexKind::Unexplained);
    }
    let target = families::d_box(k)?;
    Ok(match equivalent_under_relabelling(&reduced, &target, true)? {
        Some(_) => VertexKind::KBox { k, full_output },
        None => VertexKind::Unexplained,
    })
}

/// Enumerates the polytope with per-input output counts `a_outputs` for
/// the first party and `b_outputs` for the second and classifies every
/// vertex. With `check_liftings`, also rebuilds the partial-output vertices
/// from all strictly smaller shapes.
pub fn verify_theorem1(
    a_outputs: [usize; 2],
    b_outputs: [usize; 2],
    check_liftings: bool,
    cfg: &DdConfig,
) -> Result<Theorem1Report> {
    let shape = BoxShape::bipartite(a_outputs.to_vec(), b_outputs.to_vec())?;
    let v = ns_vertices(&shape, cfg)?;
    let mut kinds = Vec::with_capacity(v.len());
    let mut k_counts = BTreeMap::new();
    let mut deterministic = 0;
    for b in &v.vertices {
        let kind = vertex_kind(b)?;
        match kind {
            VertexKind::Deterministic => deterministic += 1,
            VertexKind::KBox { k, .. } => *k_counts.entry(k).or_insert(0) += 1,
            VertexKind::Unexplained => {}
        }
        kinds.push(kind);
    }
    let liftings_match = if check_liftings {
        let partial: BTreeSet<CorrBox> = v
            .vertices
            .iter()
            .filter(|b| !is_full_output(b))
            .cloned()
            .collect();
        Some(partial == liftings_from_smaller_shapes(&shape, cfg)?)
    } else {
        None
    };
    Ok(Theorem1Report {
        shape,
        vertices: v.vertices,
        kinds,
        k_counts,
        deterministic,
        liftings_match,
    })
}

/// All liftings into `shape` of full-output vertices of shapes obtained by
/// keeping a nonempty subset of outputs for every party and input, at least
/// one subset being proper.
pub fn liftings_from_smaller_shapes(shape: &BoxShape, cfg: &DdConfig) -> Result<BTreeSet<CorrBox>> {
    let slots: Vec<(usize, usize)> = (0..shape.parties())
        .flat_map(|k| (0..shape.inputs(k)).map(move |x| (k, x)))
        .collect();
    if slots.iter().any(|&(k, x)| shape.outputs(k, x) > 16) {
        return Err(Error::Parameter("too many outputs to enumerate subsets".into()));
    }
    let subset_counts: Vec<usize> = slots
        .iter()
        .map(|&(k, x)| (1usize << shape.outputs(k, x)) - 1)
        .collect();
    let mut full_vertices: HashMap<Vec<Vec<usize>>, Vec<CorrBox>> = HashMap::new();
    let mut out = BTreeSet::new();
    for choice in MixedRadix::new(subset_counts) {
        let subsets: Vec<Vec<usize>> = slots
            .iter()
            .zip(&choice)
            .map(|(&(k, x), &c)| (0..shape.outputs(k, x)).filter(|a| (c + 1) >> a & 1 == 1).collect())
            .collect();
        if slots
            .iter()
            .zip(&subsets)
            .all(|(&(k, x), s)| s.len() == shape.outputs(k, x))
        {
            continue;
        }
        let mut maps: Vec<Vec<Vec<usize>>> = vec![Vec::new(); shape.parties()];
        for (&(k, _), s) in slots.iter().zip(&subsets) {
            maps[k].push(s.clone());
        }
        let sub_outputs: Vec<Vec<usize>> = maps
            .iter()
            .map(|per_input| per_input.iter().map(Vec::len).collect())
            .collect();
        if !full_vertices.contains_key(&sub_outputs) {
            let sub = BoxShape::new(sub_outputs.clone())?;
            let found = ns_vertices(&sub, cfg)?
                .vertices
                .into_iter()
                .filter(is_full_output)
                .collect();
            full_vertices.insert(sub_outputs.clone(), found);
        }
        for b in &full_vertices[&sub_outputs] {
            out.insert(b.lift(shape, &maps)?);
        }
    }
    Ok(out)
}
