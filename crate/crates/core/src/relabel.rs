//! Local relabellings: input and (input-dependent) output permutations per
//! party, optionally combined with a permutation of parties that have the
//! same input/output signature.

use std::collections::HashSet;

use crate::boxes::CorrBox;
use crate::error::{Error, Result};
use crate::shape::BoxShape;

/// Group elements beyond this count are not enumerated exhaustively.
pub const DEFAULT_GROUP_CAP: u128 = 20_000_000;

/// Maps `p(a | x)` to `p(a' | x')` with, for each original party `k`:
/// new party index `party_perm[k]`, new input `input_perms[k][x]` and new
/// output `output_perms[k][x][a]` (indexed by the original input).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Relabelling {
    pub party_perm: Vec<usize>,
    pub input_perms: Vec<Vec<usize>>,
    pub output_perms: Vec<Vec<Vec<usize>>>,
}

fn is_permutation(p: &[usize]) -> bool {
    let mut seen = vec![false; p.len()];
    for &v in p {
        if v >= p.len() || seen[v] {
            return false;
        }
        seen[v] = true;
    }
    true
}

fn invert(p: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; p.len()];
    for (i, &v) in p.iter().enumerate() {
        inv[v] = i;
    }
    inv
}

/// All permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..n).collect();
    loop {
        out.push(cur.clone());
        // next lexicographic permutation
        let Some(i) = (1..n).rev().find(|&i| cur[i - 1] < cur[i]) else {
            break;
        };
        let j = (i..n).rev().find(|&j| cur[j] > cur[i - 1]).unwrap();
        cur.swap(i - 1, j);
        cur[i..].reverse();
    }
    out
}

impl Relabelling {
    pub fn identity(shape: &BoxShape) -> Self {
        let n = shape.parties();
        Relabelling {
            party_perm: (0..n).collect(),
            input_perms: (0..n).map(|k| (0..shape.inputs(k)).collect()).collect(),
            output_perms: (0..n)
                .map(|k| {
                    shape
                        .party_outputs(k)
                        .iter()
                        .map(|&d| (0..d).collect())
                        .collect()
                })
                .collect(),
        }
    }

    /// Shape of the relabelled box, or an error if this relabelling does
    /// not act on `shape`.
    pub fn target_shape(&self, shape: &BoxShape) -> Result<BoxShape> {
        let n = shape.parties();
        let bad = |m: String| Error::ShapeMismatch(m);
        if self.party_perm.len() != n
            || self.input_perms.len() != n
            || self.output_perms.len() != n
            || !is_permutation(&self.party_perm)
        {
            return Err(bad(format!("relabelling is not defined for {n} parties")));
        }
        let mut outputs = vec![Vec::new(); n];
        for k in 0..n {
            let sigma = &self.input_perms[k];
            if sigma.len() != shape.inputs(k) || !is_permutation(sigma) {
                return Err(bad(format!("party {k}: invalid input permutation")));
            }
            if self.output_perms[k].len() != shape.inputs(k) {
                return Err(bad(format!("party {k}: one output permutation per input")));
            }
            for x in 0..shape.inputs(k) {
                let pi = &self.output_perms[k][x];
                if pi.len() != shape.outputs(k, x) || !is_permutation(pi) {
                    return Err(bad(format!("party {k} input {x}: invalid output permutation")));
                }
            }
            let mut outs = vec![0; shape.inputs(k)];
            for x in 0..shape.inputs(k) {
                outs[sigma[x]] = shape.outputs(k, x);
            }
            outputs[self.party_perm[k]] = outs;
        }
        BoxShape::new(outputs)
    }

    /// Where each table entry of `shape` goes.
    pub fn table_permutation(&self, shape: &BoxShape) -> Result<(BoxShape, Vec<usize>)> {
        let target = self.target_shape(shape)?;
        let n = shape.parties();
        let mut perm = Vec::with_capacity(shape.table_len());
        let mut na = vec![0; n];
        let mut nx = vec![0; n];
        for (a, x) in shape.entries() {
            for k in 0..n {
                let t = self.party_perm[k];
                nx[t] = self.input_perms[k][x[k]];
                na[t] = self.output_perms[k][x[k]][a[k]];
            }
            perm.push(target.index(&na, &nx));
        }
        Ok((target, perm))
    }

    pub fn apply(&self, b: &CorrBox) -> Result<CorrBox> {
        let (target, perm) = self.table_permutation(b.shape())?;
        Ok(b.permuted(target, &perm))
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &Relabelling) -> Relabelling {
        let n = self.party_perm.len();
        let mut party_perm = vec![0; n];
        let mut input_perms = vec![Vec::new(); n];
        let mut output_perms = vec![Vec::new(); n];
        for k in 0..n {
            let j = self.party_perm[k];
            party_perm[k] = next.party_perm[j];
            input_perms[k] = self.input_perms[k]
                .iter()
                .map(|&x1| next.input_perms[j][x1])
                .collect();
            output_perms[k] = self.output_perms[k]
                .iter()
                .enumerate()
                .map(|(x, pi)| {
                    let x1 = self.input_perms[k][x];
                    pi.iter().map(|&a1| next.output_perms[j][x1][a1]).collect()
                })
                .collect();
        }
        Relabelling { party_perm, input_perms, output_perms }
    }

    pub fn inverse(&self) -> Relabelling {
        let n = self.party_perm.len();
        let tau_inv = invert(&self.party_perm);
        let mut input_perms = vec![Vec::new(); n];
        let mut output_perms = vec![Vec::new(); n];
        for j in 0..n {
            let k = tau_inv[j];
            let sigma_inv = invert(&self.input_perms[k]);
            output_perms[j] = sigma_inv
                .iter()
                .map(|&x| invert(&self.output_perms[k][x]))
                .collect();
            input_perms[j] = sigma_inv;
        }
        Relabelling { party_perm: tau_inv, input_perms, output_perms }
    }
}

/// The finite group of relabellings acting on one shape, enumerated by a
/// mixed-radix index.
#[derive(Debug, Clone)]
pub struct RelabellingGroup {
    shape: BoxShape,
    party_perms: Vec<Vec<usize>>,
    input_perms: Vec<Vec<Vec<usize>>>,
    /// `output_perms[k][x]`: all permutations of that input's outputs.
    output_perms: Vec<Vec<Vec<Vec<usize>>>>,
    size: u128,
}

impl RelabellingGroup {
    pub fn new(shape: &BoxShape, allow_party_permutation: bool) -> Self {
        Self::between(shape, shape, allow_party_permutation)
    }

    /// Relabellings taking boxes of `from` to boxes of `to`.
    fn between(from: &BoxShape, to: &BoxShape, allow_party_permutation: bool) -> Self {
        let n = from.parties();
        let party_perms: Vec<Vec<usize>> = if to.parties() != n {
            Vec::new()
        } else if allow_party_permutation {
            permutations(n)
                .into_iter()
                .filter(|tau| {
                    (0..n).all(|k| {
                        let mut a = from.party_outputs(k).to_vec();
                        let mut b = to.party_outputs(tau[k]).to_vec();
                        a.sort_unstable();
                        b.sort_unstable();
                        a == b
                    })
                })
                .collect()
        } else if (0..n).all(|k| {
            let mut a = from.party_outputs(k).to_vec();
            let mut b = to.party_outputs(k).to_vec();
            a.sort_unstable();
            b.sort_unstable();
            a == b
        }) {
            vec![(0..n).collect()]
        } else {
            Vec::new()
        };
        let mut perm_cache: Vec<Vec<Vec<usize>>> = Vec::new();
        let mut perms_of = |d: usize| -> Vec<Vec<usize>> {
            while perm_cache.len() <= d {
                let m = perm_cache.len();
                perm_cache.push(permutations(m));
            }
            perm_cache[d].clone()
        };
        let input_perms: Vec<Vec<Vec<usize>>> = (0..n)
            .map(|k| {
                // filtered later against the chosen party permutation
                perms_of(from.inputs(k))
            })
            .collect();
        let output_perms: Vec<Vec<Vec<Vec<usize>>>> = (0..n)
            .map(|k| from.party_outputs(k).iter().map(|&d| perms_of(d)).collect())
            .collect();
        let mut size: u128 = party_perms.len() as u128;
        for k in 0..n {
            size = size.saturating_mul(input_perms[k].len() as u128);
            for per_x in &output_perms[k] {
                size = size.saturating_mul(per_x.len() as u128);
            }
        }
        RelabellingGroup {
            shape: from.clone(),
            party_perms,
            input_perms,
            output_perms,
            size,
        }
    }

    /// Upper bound on the number of elements (input permutations that do not
    /// preserve output counts are skipped during iteration).
    pub fn size(&self) -> u128 {
        self.size
    }

    /// Every relabelling of the group that maps `shape` onto itself.
    pub fn elements(&self) -> impl Iterator<Item = Relabelling> + '_ {
        let n = self.shape.parties();
        let mut radices: Vec<usize> = vec![self.party_perms.len()];
        for k in 0..n {
            radices.push(self.input_perms[k].len());
            for per_x in &self.output_perms[k] {
                radices.push(per_x.len());
            }
        }
        crate::shape::MixedRadix::new(radices).filter_map(move |digits| {
            let mut it = digits.into_iter();
            let party_perm = self.party_perms[it.next()?].clone();
            let mut input_perms = Vec::with_capacity(n);
            let mut output_perms = Vec::with_capacity(n);
            for k in 0..n {
                input_perms.push(self.input_perms[k][it.next()?].clone());
                let outs: Vec<Vec<usize>> = self.output_perms[k]
                    .iter()
                    .map(|per_x| per_x[it.next().unwrap()].clone())
                    .collect();
                output_perms.push(outs);
            }
            let r = Relabelling { party_perm, input_perms, output_perms };
            match r.target_shape(&self.shape) {
                Ok(t) if t == self.shape => Some(r),
                _ => None,
            }
        })
    }

    /// Table permutations of every element, for orbit computations.
    pub fn table_permutations(&self, cap: u128) -> Result<Vec<Vec<usize>>> {
        if self.size > cap {
            return Err(Error::ResourceCap(format!(
                "relabelling group has up to {} elements (cap {cap})",
                self.size
            )));
        }
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for r in self.elements() {
            let (_, perm) = r.table_permutation(&self.shape)?;
            if seen.insert(perm.clone()) {
                out.push(perm);
            }
        }
        Ok(out)
    }
}

/// Lexicographically smallest table in the orbit of `b`, with a witness.
pub fn canonical_form(b: &CorrBox, allow_party_permutation: bool) -> Result<(CorrBox, Relabelling)> {
    let group = RelabellingGroup::new(b.shape(), allow_party_permutation);
    if group.size() > DEFAULT_GROUP_CAP {
        return Err(Error::ResourceCap(format!(
            "relabelling group has up to {} elements",
            group.size()
        )));
    }
    let mut best: Option<(CorrBox, Relabelling)> = None;
    for r in group.elements() {
        let img = r.apply(b)?;
        if best.as_ref().map_or(true, |(cur, _)| img.cmp_table(cur).is_lt()) {
            best = Some((img, r));
        }
    }
    best.ok_or_else(|| Error::ShapeMismatch("empty relabelling group".into()))
}

/// Searches for a relabelling taking `a` to `b`. The search is exhaustive
/// over the group; output permutations are chosen by backtracking, checking
/// each joint-input block as soon as all of its parties' permutations are
/// fixed.
pub fn equivalent_under_relabelling(
    a: &CorrBox,
    b: &CorrBox,
    allow_party_permutation: bool,
) -> Result<Option<Relabelling>> {
    let (sa, sb) = (a.shape(), b.shape());
    if sa.parties() != sb.parties() || sa.table_len() != sb.table_len() {
        return Err(Error::ShapeMismatch(format!("cannot relabel {sa} into {sb}")));
    }
    let group = RelabellingGroup::between(sa, sb, allow_party_permutation);
    if group.party_perms.is_empty() {
        return Err(Error::ShapeMismatch(format!("cannot relabel {sa} into {sb}")));
    }
    let n = sa.parties();
    let input_choices = crate::shape::MixedRadix::new(
        (0..n).map(|k| group.input_perms[k].len()).collect(),
    );
    let input_choices: Vec<Vec<usize>> = input_choices.collect();
    for tau in &group.party_perms {
        'inputs: for choice in &input_choices {
            let sigmas: Vec<&Vec<usize>> =
                (0..n).map(|k| &group.input_perms[k][choice[k]]).collect();
            // output counts must be preserved
            for k in 0..n {
                for x in 0..sa.inputs(k) {
                    if sb.outputs(tau[k], sigmas[k][x]) != sa.outputs(k, x) {
                        continue 'inputs;
                    }
                }
            }
            // cheap invariant: block multisets must agree
            let target_block = |x: &[usize]| -> usize {
                let mut nx = vec![0; n];
                for k in 0..n {
                    nx[tau[k]] = sigmas[k][x[k]];
                }
                sb.encode_inputs(&nx)
            };
            for (j, x) in sa.input_tuples().enumerate() {
                let jb = target_block(&x);
                let mut ba: Vec<_> = block(a, j).to_vec();
                let mut bb: Vec<_> = block(b, jb).to_vec();
                ba.sort();
                bb.sort();
                if ba != bb {
                    continue 'inputs;
                }
            }
            let mut search = OutputSearch::new(a, b, tau, &sigmas);
            if let Some(pis) = search.run() {
                return Ok(Some(Relabelling {
                    party_perm: tau.clone(),
                    input_perms: sigmas.iter().map(|s| (*s).clone()).collect(),
                    output_perms: pis,
                }));
            }
        }
    }
    Ok(None)
}

fn block(b: &CorrBox, j: usize) -> &[crate::rational::Rational] {
    let off = b.shape().block_offset(j);
    &b.table()[off..off + b.shape().block_len(j)]
}

struct OutputSearch<'a> {
    a: &'a CorrBox,
    b: &'a CorrBox,
    tau: &'a [usize],
    sigmas: &'a [&'a Vec<usize>],
    /// (party, input) slots in assignment order.
    slots: Vec<(usize, usize)>,
    /// Joint inputs (as tuples) whose last needed slot is the given one.
    completes: Vec<Vec<Vec<usize>>>,
    assigned: Vec<Vec<Option<Vec<usize>>>>,
}

impl<'a> OutputSearch<'a> {
    fn new(a: &'a CorrBox, b: &'a CorrBox, tau: &'a [usize], sigmas: &'a [&'a Vec<usize>]) -> Self {
        let sa = a.shape();
        let n = sa.parties();
        let max_inputs = (0..n).map(|k| sa.inputs(k)).max().unwrap_or(0);
        let mut slots = Vec::new();
        for x in 0..max_inputs {
            for k in 0..n {
                if x < sa.inputs(k) {
                    slots.push((k, x));
                }
            }
        }
        let pos = |k: usize, x: usize| slots.iter().position(|&s| s == (k, x)).unwrap();
        let mut completes = vec![Vec::new(); slots.len()];
        for xs in sa.input_tuples() {
            let last = (0..n).map(|k| pos(k, xs[k])).max().unwrap();
            completes[last].push(xs);
        }
        let assigned = (0..n).map(|k| vec![None; sa.inputs(k)]).collect();
        OutputSearch { a, b, tau, sigmas, slots, completes, assigned }
    }

    fn run(&mut self) -> Option<Vec<Vec<Vec<usize>>>> {
        if self.assign(0) {
            Some(
                self.assigned
                    .iter()
                    .map(|per_x| per_x.iter().map(|p| p.clone().unwrap()).collect())
                    .collect(),
            )
        } else {
            None
        }
    }

    fn assign(&mut self, slot: usize) -> bool {
        if slot == self.slots.len() {
            return true;
        }
        let (k, x) = self.slots[slot];
        let d = self.a.shape().outputs(k, x);
        for pi in permutations(d) {
            self.assigned[k][x] = Some(pi);
            let ok = self.completes[slot].iter().all(|xs| self.block_matches(xs));
            if ok && self.assign(slot + 1) {
                return true;
            }
        }
        self.assigned[k][x] = None;
        false
    }

    fn block_matches(&self, xs: &[usize]) -> bool {
        let sa = self.a.shape();
        let n = sa.parties();
        let mut nx = vec![0; n];
        for k in 0..n {
            nx[self.tau[k]] = self.sigmas[k][xs[k]];
        }
        let radices: Vec<usize> = (0..n).map(|k| sa.outputs(k, xs[k])).collect();
        let mut na = vec![0; n];
        crate::shape::MixedRadix::new(radices).all(|outs| {
            for k in 0..n {
                let pi = self.assigned[k][xs[k]].as_ref().unwrap();
                na[self.tau[k]] = pi[outs[k]];
            }
            self.a.get(&outs, xs) == self.b.get(&na, &nx)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families;

    #[test]
    fn permutation_listing() {
        assert_eq!(permutations(0), vec![Vec::<usize>::new()]);
        assert_eq!(permutations(3).len(), 6);
        assert_eq!(permutations(3)[1], vec![0, 2, 1]);
    }

    #[test]
    fn output_flip_maps_pr_gamma() {
        // a -> a ⊕ 1 on both inputs turns γ = 0 into γ = 1.
        let s = BoxShape::uniform(2, 2, 2).unwrap();
        let mut r = Relabelling::identity(&s);
        r.output_perms[0] = vec![vec![1, 0], vec![1, 0]];
        let out = r.apply(&families::pr(0, 0, 0).unwrap()).unwrap();
        assert_eq!(out, families::pr(0, 0, 1).unwrap());
    }

    #[test]
    fn identity_and_input_flip() {
        let s = BoxShape::uniform(2, 2, 2).unwrap();
        let pr = families::pr(0, 0, 0).unwrap();
        assert_eq!(Relabelling::identity(&s).apply(&pr).unwrap(), pr);
        let mut flip = Relabelling::identity(&s);
        flip.input_perms[0] = vec![1, 0];
        let det = families::local_deterministic(0, 0, 0, 0).unwrap();
        assert_eq!(flip.apply(&det).unwrap(), det);
    }

    #[test]
    fn inverse_and_composition() {
        let s = BoxShape::uniform(3, 2, 2).unwrap();
        let r = Relabelling {
            party_perm: vec![2, 0, 1],
            input_perms: vec![vec![1, 0], vec![0, 1], vec![1, 0]],
            output_perms: vec![
                vec![vec![1, 0], vec![0, 1]],
                vec![vec![0, 1], vec![1, 0]],
                vec![vec![1, 0], vec![1, 0]],
            ],
        };
        let b = families::x_y_plus_z();
        let img = r.apply(&b).unwrap();
        assert!(img.validate().is_ok());
        assert_eq!(r.inverse().apply(&img).unwrap(), b);
        assert_eq!(r.then(&r.inverse()), Relabelling::identity(&s));
        let r2 = r.then(&r);
        assert_eq!(r2.apply(&b).unwrap(), r.apply(&img).unwrap());
    }

    #[test]
    fn group_sizes() {
        let s = BoxShape::uniform(2, 2, 2).unwrap();
        assert_eq!(RelabellingGroup::new(&s, false).elements().count(), 64);
        assert_eq!(RelabellingGroup::new(&s, true).elements().count(), 128);
        let t = BoxShape::uniform(3, 2, 2).unwrap();
        assert_eq!(RelabellingGroup::new(&t, true).size(), 3072);
        // heterogeneous: the input swap would move a 3-output input onto a
        // 2-output one, and the parties differ
        let h = BoxShape::bipartite(vec![2, 3], vec![2, 2]).unwrap();
        assert_eq!(RelabellingGroup::new(&h, true).elements().count(), 2 * 6 * 2 * 2 * 2);
    }

    #[test]
    fn pr_boxes_are_equivalent() {
        let a = families::pr(0, 0, 0).unwrap();
        let b = families::pr(1, 0, 0).unwrap();
        let w = equivalent_under_relabelling(&a, &b, false).unwrap().unwrap();
        assert_eq!(w.apply(&a).unwrap(), b);
        let det = families::local_deterministic(0, 0, 0, 0).unwrap();
        assert!(equivalent_under_relabelling(&a, &det, true).unwrap().is_none());
    }

    #[test]
    fn svetlichny_is_not_xyz() {
        let sv = families::svetlichny();
        let xyz = families::xyz();
        assert!(equivalent_under_relabelling(&sv, &xyz, true).unwrap().is_none());
        assert!(equivalent_under_relabelling(&sv, &sv, true).unwrap().is_some());
    }

    #[test]
    fn canonical_form_is_orbit_invariant() {
        let (c0, r0) = canonical_form(&families::pr(0, 0, 0).unwrap(), true).unwrap();
        let (c1, _) = canonical_form(&families::pr(1, 1, 1).unwrap(), true).unwrap();
        assert_eq!(c0, c1);
        assert_eq!(r0.apply(&families::pr(0, 0, 0).unwrap()).unwrap(), c0);
    }

    #[test]
    fn shape_mismatch_is_an_error() {
        let pr = families::pr(0, 0, 0).unwrap();
        assert!(equivalent_under_relabelling(&pr, &families::xyz(), true).is_err());
        let s3 = BoxShape::uniform(3, 2, 2).unwrap();
        assert!(Relabelling::identity(&s3).apply(&pr).is_err());
    }
}
