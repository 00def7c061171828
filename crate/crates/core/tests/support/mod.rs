//! Generators and property checks shared by the property and acceptance
//! suites. Checks panic on failure.
#![allow(dead_code)]

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use nsbox_core::bell;
use nsbox_core::dd::{DdConfig, InsertionOrder};
use nsbox_core::families;
use nsbox_core::io::{self, BoxDoc, FunctionalDoc, WiringDoc};
use nsbox_core::polytope::{build_hrep, HPolytope};
use nsbox_core::rational::{self, Rational};
use nsbox_core::relabel::{self, Relabelling, RelabellingGroup};
use nsbox_core::vertices::enumerate_vertices;
use nsbox_core::wiring::{evaluate_wiring, ComponentSlot, Item, Lookup, PartyProgram, Wiring};
use nsbox_core::{BoxShape, CorrBox};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_perm(r: &mut ChaCha8Rng, n: usize) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(r);
    p
}

/// Any relabelling of a shape with equal output counts everywhere.
pub fn random_relabelling(r: &mut ChaCha8Rng, shape: &BoxShape, parties: bool) -> Relabelling {
    let n = shape.parties();
    Relabelling {
        party_perm: if parties { random_perm(r, n) } else { (0..n).collect() },
        input_perms: (0..n).map(|k| random_perm(r, shape.inputs(k))).collect(),
        output_perms: (0..n)
            .map(|k| (0..shape.inputs(k)).map(|x| random_perm(r, shape.outputs(k, x))).collect())
            .collect(),
    }
}

pub fn random_deterministic(r: &mut ChaCha8Rng, shape: &BoxShape) -> CorrBox {
    let f: Vec<Vec<usize>> = (0..shape.parties())
        .map(|k| (0..shape.inputs(k)).map(|x| r.gen_range(0..shape.outputs(k, x))).collect())
        .collect();
    CorrBox::deterministic(shape, &f).unwrap()
}

/// Vertices of several kinds for a binary shape with 2 or 3 parties.
pub fn random_vertex(r: &mut ChaCha8Rng, parties: usize) -> CorrBox {
    let shape = BoxShape::uniform(parties, 2, 2).unwrap();
    let named = if parties == 2 {
        families::all_pr()[r.gen_range(0..8)].clone()
    } else {
        let all = [
            families::svetlichny(),
            families::xyz(),
            families::x_y_plus_z(),
            families::pr_with_deterministic_third(),
        ];
        all[r.gen_range(0..all.len())].clone()
    };
    if r.gen_bool(0.5) {
        let g = random_relabelling(r, &shape, true);
        g.apply(&named).unwrap()
    } else {
        random_deterministic(r, &shape)
    }
}

pub fn random_weights(r: &mut ChaCha8Rng, n: usize) -> Vec<Rational> {
    let raw: Vec<i64> = (0..n).map(|_| r.gen_range(1..=12)).collect();
    let total: i64 = raw.iter().sum();
    raw.iter().map(|&w| rational::ratio(w, total)).collect()
}

pub fn random_box(r: &mut ChaCha8Rng, parties: usize) -> CorrBox {
    let parts: Vec<CorrBox> = (0..r.gen_range(1..=4)).map(|_| random_vertex(r, parties)).collect();
    let w = random_weights(r, parts.len());
    let mix: Vec<(Rational, &CorrBox)> = w.into_iter().zip(&parts).collect();
    CorrBox::mixture(&mix).unwrap()
}

pub fn random_lookup(r: &mut ChaCha8Rng, scope: &[usize], range: usize) -> Lookup {
    let len: usize = scope.iter().product();
    Lookup {
        table: (0..len).map(|_| r.gen_range(0..range)).collect(),
    }
}

/// A random wiring over random vertex components, with the boxes to use.
pub fn random_wiring(r: &mut ChaCha8Rng) -> (Wiring, Vec<CorrBox>) {
    let parties = r.gen_range(2..=3);
    let shape = BoxShape::new(
        (0..parties)
            .map(|_| {
                let m = r.gen_range(1..=2);
                (0..m).map(|_| r.gen_range(2..=3)).collect()
            })
            .collect(),
    )
    .unwrap();
    let mut components = Vec::new();
    let mut boxes = Vec::new();
    for _ in 0..r.gen_range(0..=3) {
        let k = if parties == 3 && r.gen_bool(0.4) { 3 } else { 2 };
        let b = random_vertex(r, k);
        let assign: Vec<usize> = random_perm(r, parties).into_iter().take(k).collect();
        components.push(ComponentSlot {
            shape: b.shape().clone(),
            parties: assign,
        });
        boxes.push(b);
    }
    let shared = if r.gen_bool(0.3) {
        let n = r.gen_range(2..=3);
        random_weights(r, n)
    } else {
        Vec::new()
    };
    let mut programs = Vec::new();
    for k in 0..parties {
        let mut sides: Vec<(usize, usize)> = components
            .iter()
            .enumerate()
            .flat_map(|(c, slot)| {
                slot.parties
                    .iter()
                    .enumerate()
                    .filter(move |(_, &p)| p == k)
                    .map(move |(s, _)| (c, s))
            })
            .collect();
        sides.shuffle(r);
        let mut scope = vec![shape.inputs(k)];
        if !shared.is_empty() {
            scope.push(shared.len());
        }
        let mut items = Vec::new();
        for (c, s) in sides {
            let slot = &components[c];
            items.push(Item::Use {
                component: c,
                side: s,
                input: random_lookup(r, &scope, slot.shape.inputs(s)),
            });
            scope.push(slot.shape.max_outputs(s));
        }
        // Output values must fit the output count of each protocol input.
        let len: usize = scope.iter().product();
        let block = len / shape.inputs(k);
        let output = Lookup {
            table: (0..len).map(|i| r.gen_range(0..shape.outputs(k, i / block))).collect(),
        };
        programs.push(PartyProgram { items, output });
    }
    let w = Wiring {
        shape,
        components,
        shared,
        messages: Vec::new(),
        programs,
    };
    (w, boxes)
}

/// Brute-force vertex oracle: every basic feasible solution of
/// `{x ≥ 0 : A x = b}` found by solving on each column subset.
pub fn basic_solutions(h: &HPolytope) -> BTreeSet<Vec<Rational>> {
    let n = h.ambient_dimension();
    let rows: Vec<Vec<Rational>> = h
        .equalities
        .iter()
        .map(|r| {
            let mut v = r.coeffs.clone();
            v.push(r.rhs.clone());
            v
        })
        .collect();
    let mut out = BTreeSet::new();
    for mask in 0u32..(1 << n) {
        let cols: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        if let Some(x) = solve_on(&rows, &cols, n) {
            if x.iter().all(|v| !v.is_negative()) {
                out.insert(x);
            }
        }
    }
    out
}

/// Unique solution with support inside `cols`, if any.
pub fn solve_on(rows: &[Vec<Rational>], cols: &[usize], n: usize) -> Option<Vec<Rational>> {
    let mut m: Vec<Vec<Rational>> = rows
        .iter()
        .map(|r| {
            let mut v: Vec<Rational> = cols.iter().map(|&c| r[c].clone()).collect();
            v.push(r[n].clone());
            v
        })
        .collect();
    let w = cols.len();
    let mut pivot_row = 0;
    let mut pivots = Vec::new();
    for c in 0..w {
        let Some(p) = (pivot_row..m.len()).find(|&i| !m[i][c].is_zero()) else {
            return None;
        };
        m.swap(pivot_row, p);
        let inv = Rational::one() / m[pivot_row][c].clone();
        for v in &mut m[pivot_row] {
            *v = &*v * &inv;
        }
        for i in 0..m.len() {
            if i != pivot_row && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in 0..=w {
                    let d = &m[pivot_row][j] * &f;
                    m[i][j] -= d;
                }
            }
        }
        pivots.push(c);
        pivot_row += 1;
    }
    if m[pivot_row..].iter().any(|r| !r[w].is_zero()) {
        return None;
    }
    let mut x = vec![Rational::zero(); n];
    for (i, &c) in pivots.iter().enumerate() {
        x[cols[c]] = m[i][w].clone();
    }
    Some(x)
}

/// `r × c` transportation polytope with random positive margins.
pub fn transportation(seed: u64, r: usize, c: usize) -> HPolytope {
    let mut g = rng(seed);
    let mut rows: Vec<i64> = (0..r).map(|_| g.gen_range(1..=4)).collect();
    let mut cols: Vec<i64> = (0..c).map(|_| g.gen_range(1..=4)).collect();
    let (sr, sc): (i64, i64) = (rows.iter().sum(), cols.iter().sum());
    // Equalize the totals by topping up the smaller side.
    if sr < sc {
        rows[0] += sc - sr;
    } else {
        cols[0] += sr - sc;
    }
    let shape = BoxShape::uniform(1, 1, r * c).unwrap();
    let mut h = HPolytope { shape, equalities: Vec::new() };
    for (i, &v) in rows.iter().enumerate() {
        let coeffs = (0..r * c).map(|k| if k / c == i { rational::one() } else { rational::zero() }).collect();
        h.push(coeffs, rational::int(v));
    }
    for (j, &v) in cols.iter().enumerate() {
        let coeffs = (0..r * c).map(|k| if k % c == j { rational::one() } else { rational::zero() }).collect();
        h.push(coeffs, rational::int(v));
    }
    h
}

pub fn vertex_set(h: &HPolytope, cfg: &DdConfig) -> BTreeSet<Vec<Rational>> {
    enumerate_vertices(h, cfg)
        .unwrap()
        .vertices
        .into_iter()
        .map(CorrBox::into_table)
        .collect()
}

pub fn group_elements_are_closed_and_distinct() {
    for (shape, parties) in [
        (BoxShape::uniform(2, 2, 2).unwrap(), true),
        (BoxShape::uniform(2, 2, 2).unwrap(), false),
        (BoxShape::bipartite(vec![2, 3], vec![3, 2]).unwrap(), true),
    ] {
        let group = RelabellingGroup::new(&shape, parties);
        let elems: Vec<Relabelling> = group.elements().collect();
        let perms: BTreeSet<Vec<usize>> = group.table_permutations(u128::MAX).unwrap().into_iter().collect();
        // Distinct elements act by distinct table permutations.
        assert_eq!(perms.len(), elems.len(), "{shape}");
        let mut r = rng(7);
        for _ in 0..200 {
            let g = elems.choose(&mut r).unwrap();
            let h = elems.choose(&mut r).unwrap();
            let (_, p) = g.then(h).table_permutation(&shape).unwrap();
            assert!(perms.contains(&p));
            let (_, q) = g.inverse().table_permutation(&shape).unwrap();
            assert!(perms.contains(&q));
        }
    }
    // Local relabellings of the binary bipartite shape: (2 · 2 · 2)² = 64.
    assert_eq!(RelabellingGroup::new(&BoxShape::uniform(2, 2, 2).unwrap(), false).elements().count(), 64);
    assert_eq!(RelabellingGroup::new(&BoxShape::uniform(2, 2, 2).unwrap(), true).elements().count(), 128);
    assert_eq!(RelabellingGroup::new(&BoxShape::uniform(3, 2, 2).unwrap(), false).elements().count(), 512);
    assert_eq!(RelabellingGroup::new(&BoxShape::uniform(3, 2, 2).unwrap(), true).elements().count(), 3072);
}

pub fn dd_order_independence_on_no_signalling_polytopes() {
    for shape in [
        BoxShape::uniform(2, 2, 2).unwrap(),
        BoxShape::bipartite(vec![2, 2], vec![2, 3]).unwrap(),
        BoxShape::bipartite(vec![3, 1], vec![2, 2]).unwrap(),
    ] {
        let h = build_hrep(&shape);
        let base = vertex_set(&h, &DdConfig::default());
        let mut r = rng(11);
        for _ in 0..3 {
            let mut shuffled = h.clone();
            shuffled.equalities.shuffle(&mut r);
            let order = InsertionOrder::Given(random_perm(&mut r, h.ambient_dimension()));
            for order in [order, InsertionOrder::MinPairs] {
                let cfg = DdConfig { order, ..DdConfig::default() };
                assert_eq!(vertex_set(&shuffled, &cfg), base, "{shape}");
            }
        }
    }
}

pub fn wiring_closure(seed: u64) {
    let mut r = rng(seed);
    let (w, boxes) = random_wiring(&mut r);
    w.check().unwrap();
    let out = evaluate_wiring(&w, &boxes).unwrap();
    assert!(out.is_valid(), "seed {seed}: {:?}", out.validate());
    assert_eq!(out.shape(), &w.shape);
}

pub fn relabelling_acts_as_a_group(seed: u64, parties: usize) {
    let mut r = rng(seed);
    let b = random_box(&mut r, parties);
    let shape = b.shape().clone();
    let g = random_relabelling(&mut r, &shape, true);
    let h = random_relabelling(&mut r, &shape, true);
    let gb = g.apply(&b).unwrap();
    assert_eq!(g.then(&h).apply(&b).unwrap(), h.apply(&gb).unwrap());
    assert_eq!(g.inverse().apply(&gb).unwrap(), b);
    assert_eq!(g.then(&g.inverse()), Relabelling::identity(&shape));
    assert_eq!(Relabelling::identity(&shape).apply(&b).unwrap(), b);
    assert!(gb.is_valid());
    // Table entries are permuted, not changed.
    let mut x: Vec<Rational> = b.table().to_vec();
    let mut y: Vec<Rational> = gb.table().to_vec();
    x.sort();
    y.sort();
    assert_eq!(x, y);
}

pub fn relabelling_preserves_bell_values(seed: u64) {
    let mut r = rng(seed);
    let b = random_box(&mut r, 2);
    let g = random_relabelling(&mut r, b.shape(), true);
    let gb = g.apply(&b).unwrap();
    assert_eq!(bell::max_chsh(&b).unwrap(), bell::max_chsh(&gb).unwrap());
    let t = random_box(&mut r, 3);
    let gt = random_relabelling(&mut r, t.shape(), false).apply(&t).unwrap();
    assert_eq!(bell::svetlichny(&t).unwrap(), bell::svetlichny(&gt).unwrap());
}

pub fn equivalence_is_an_equivalence_relation(seed: u64) {
    let mut r = rng(seed);
    let a = random_box(&mut r, 2);
    let g = random_relabelling(&mut r, a.shape(), true);
    let h = random_relabelling(&mut r, a.shape(), true);
    let b = g.apply(&a).unwrap();
    let c = h.apply(&b).unwrap();
    for (x, y) in [(&a, &a), (&a, &b), (&b, &a), (&b, &c), (&a, &c)] {
        let w = relabel::equivalent_under_relabelling(x, y, true)
            .unwrap()
            .expect("related boxes");
        assert_eq!(&w.apply(x).unwrap(), y);
    }
    let (ca, _) = relabel::canonical_form(&a, true).unwrap();
    let (cc, wc) = relabel::canonical_form(&c, true).unwrap();
    assert_eq!(ca, cc);
    assert_eq!(wc.apply(&c).unwrap(), cc);
    // An unrelated box is related only if the canonical forms agree.
    let d = random_box(&mut r, 2);
    let (cd, _) = relabel::canonical_form(&d, true).unwrap();
    let related = relabel::equivalent_under_relabelling(&a, &d, true).unwrap().is_some();
    assert_eq!(related, cd == ca);
}

pub fn dd_is_order_independent(seed: u64, r: usize, c: usize) {
    let h = transportation(seed, r, c);
    let oracle = basic_solutions(&h);
    assert!(!oracle.is_empty());
    let mut g = rng(seed ^ 0x5eed);
    let mut shuffled = h.clone();
    shuffled.equalities.shuffle(&mut g);
    let given = random_perm(&mut g, h.ambient_dimension());
    for order in [InsertionOrder::MaxBalance, InsertionOrder::MinPairs, InsertionOrder::Given(given)] {
        let cfg = DdConfig { order, ..DdConfig::default() };
        assert_eq!(vertex_set(&h, &cfg), oracle);
        assert_eq!(vertex_set(&shuffled, &cfg), oracle);
    }
}

pub fn box_documents_round_trip(seed: u64, parties: usize) {
    let mut r = rng(seed);
    let b = random_box(&mut r, parties);
    let text = io::to_json(&BoxDoc::from(&b));
    assert_eq!(io::from_json::<BoxDoc>(&text).unwrap().to_box().unwrap(), b);
    // Signalling or negative tables round-trip too.
    let raw: Vec<Rational> = (0..b.shape().table_len())
        .map(|_| Rational::new(BigInt::from(r.gen_range(-50i64..50)), BigInt::from(r.gen_range(1i64..30))))
        .collect();
    let junk = CorrBox::new(b.shape().clone(), raw).unwrap();
    let text = io::to_json(&BoxDoc::from(&junk));
    assert_eq!(io::from_json::<BoxDoc>(&text).unwrap().to_box().unwrap(), junk);
}

pub fn wiring_documents_round_trip(seed: u64) {
    let mut r = rng(seed);
    let (w, boxes) = random_wiring(&mut r);
    let doc: WiringDoc = io::from_json(&io::to_json(&WiringDoc::new(&w, &boxes))).unwrap();
    assert_eq!(doc.to_wiring().unwrap(), w);
    assert_eq!(doc.resources(std::path::Path::new(".")).unwrap(), boxes);
}

pub fn functional_documents_round_trip(seed: u64) {
    let mut r = rng(seed);
    let shape = BoxShape::uniform(2, 2, 2).unwrap();
    let coeffs = (0..16).map(|_| rational::ratio(r.gen_range(-9..9), r.gen_range(1..5))).collect();
    let mut f = bell::BellFunctional::new(shape, coeffs).unwrap();
    if r.gen_bool(0.5) {
        f.local_bound = Some(rational::ratio(r.gen_range(-9..9), 7));
    }
    let doc: FunctionalDoc = io::from_json(&io::to_json(&FunctionalDoc::from(&f))).unwrap();
    assert_eq!(doc.to_functional().unwrap(), f);
}

pub fn rationals_round_trip(n: i64, d: i64) {
    let q = Rational::new(BigInt::from(n), BigInt::from(d));
    let s = rational::format(&q);
    assert!(s.contains('/'));
    assert_eq!(rational::parse(&s).unwrap(), q);
}
