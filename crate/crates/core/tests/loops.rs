mod common;

use common::{arb_loop, lp, plaquette0};
use latticeloop::assignments::PlaquetteAssignment;
use latticeloop::lattice::{Edge, Vertex};
use latticeloop::loops::{is_balanced, Loop, Mode};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

/// Erases a random cyclically adjacent `e e⁻¹` pair until none is left.
fn erase_randomly(l: &Loop, rng: &mut ChaCha8Rng) -> Vec<Edge> {
    let mut e = l.edges().to_vec();
    loop {
        let n = e.len();
        let spots: Vec<usize> = (0..n).filter(|&i| n >= 2 && e[(i + 1) % n] == e[i].reverse()).collect();
        if spots.is_empty() {
            return e;
        }
        let i = spots[rng.gen_range(0..spots.len())];
        if i + 1 < n {
            e.drain(i..i + 2);
        } else {
            e.pop();
            e.remove(0);
        }
    }
}

/// Rotation and translation class by brute force: the sorted list of all
/// rotations, each moved so that its root sits at the origin.
fn class_of(l: &Loop) -> Vec<Vec<Edge>> {
    let mut all: Vec<Vec<Edge>> = (0..l.len())
        .map(|k| {
            let r = l.rotated(k);
            let off = r.edges()[0].tail.neg();
            r.translate(&off).edges().to_vec()
        })
        .collect();
    all.sort();
    all
}

fn multiset(edges: &[Edge]) -> BTreeMap<Edge, usize> {
    let mut m = BTreeMap::new();
    for e in edges {
        *m.entry(*e).or_insert(0) += 1;
    }
    m
}

#[test]
fn erase_examples() {
    assert!(lp("+1 -1").erase_backtracks().is_null());
    assert!(lp("+1 +2 -2 -1").erase_backtracks().is_null());
    let p = Loop::from_plaquette(&plaquette0());
    assert_eq!(p.erase_backtracks(), p);
}

#[test]
fn positive_splitting_of_a_figure_eight() {
    // e a e' b with a = +2 -1 -2 and b = -2 -1 +2
    let l = lp("+1 +2 -1 -2 +1 -2 -1 +2");
    let s = l.positive_splittings(0).unwrap();
    assert_eq!(s.len(), 1);
    let (x, y) = &s[0].parts;
    let e = l.edges();
    assert_eq!(x.edges(), &[e[0], e[5], e[6], e[7]][..]);
    assert_eq!(y.edges(), &[e[1], e[2], e[3], e[4]][..]);
    assert_eq!(x.len() + y.len(), l.len());
    assert!(Loop::from_plaquette(&plaquette0()).positive_splittings(0).unwrap().is_empty());
}

#[test]
fn merge_matches_process_cases() {
    let p = plaquette0();
    let l = Loop::from_plaquette(&p);
    let e = l.edges()[0];
    // negative: ℓ = 𝐞π with 𝐞⁻¹ e_a e_b e_c gives e_a e_b e_c π
    let q = p.inverse();
    let ql = Loop::from_plaquette(&q);
    let at = q.position_of(&e.reverse()).unwrap();
    let m = Loop::merge(&l, 0, &ql, at, Mode::Negative).unwrap();
    let nu = ql.rotated(at);
    let mut want = nu.edges()[1..].to_vec();
    want.extend_from_slice(&l.edges()[1..]);
    assert_eq!(m.edges(), &want[..]);
    // positive: 𝐞′ e_d e_f e_g gives 𝐞 e_d e_f e_g 𝐞′ π
    let (d, r) = l.deformations(0, Mode::Positive).unwrap().remove(0);
    let rl = Loop::from_plaquette(&r).rotated(r.position_of(&e).unwrap());
    let mut want = vec![e];
    want.extend_from_slice(&rl.edges()[1..]);
    want.push(e);
    want.extend_from_slice(&l.edges()[1..]);
    assert_eq!(d.edges(), &want[..]);
}

#[test]
fn deformation_lengths_and_counts() {
    for dim in [2usize, 3] {
        let l = if dim == 2 { lp("+1 +1 +2 -1 -1 -2") } else { Loop::parse("+1 +3 -1 -3", 3).unwrap() };
        for at in 0..l.len() {
            let pos = l.deformations(at, Mode::Positive).unwrap();
            let neg = l.deformations(at, Mode::Negative).unwrap();
            assert_eq!(pos.len(), 2 * (dim - 1));
            assert_eq!(neg.len(), 2 * (dim - 1));
            assert!(pos.iter().all(|(m, _)| m.len() == l.len() + 4));
            assert!(neg.iter().all(|(m, _)| m.len() == l.len() + 2));
        }
    }
}

#[test]
fn canonical_keys_separate_plaquettes() {
    let p = plaquette0();
    let q = p.translate(&Vertex::new(&[-1, 0]));
    let a = Loop::from_plaquette(&p);
    let b = Loop::from_plaquette(&q);
    // translates share a key, inverse orientation does not
    assert_eq!(a.canonical().key(), b.canonical().key());
    assert_ne!(a.canonical().key(), Loop::from_plaquette(&p.inverse()).canonical().key());
    let five = Vertex::new(&[5, 5]);
    assert_eq!(a.canonical().key(), a.translate(&five).canonical().key());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn erasure_is_idempotent_and_confluent(l in arb_loop(3, 10), seed in any::<u64>()) {
        let r = l.erase_backtracks();
        prop_assert!(!r.has_backtrack());
        prop_assert_eq!(r.erase_backtracks(), r.clone());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let other = Loop::new(erase_randomly(&l, &mut rng)).unwrap();
        // results agree up to the choice of root
        prop_assert_eq!(class_of(&other), class_of(&r));
    }

    #[test]
    fn splitting_counts_and_conservation(l in arb_loop(2, 10), pick in any::<prop::sample::Index>()) {
        let at = pick.index(l.len());
        let e = l.edges()[at];
        let pos = l.positive_splittings(at).unwrap();
        let neg = l.negative_splittings(at).unwrap();
        prop_assert_eq!(pos.len(), l.count(&e) - 1);
        prop_assert_eq!(neg.len(), l.count(&e.reverse()));
        let all = multiset(l.edges());
        for s in &pos {
            let mut got = s.parts.0.edges().to_vec();
            got.extend_from_slice(s.parts.1.edges());
            prop_assert_eq!(multiset(&got), all.clone());
        }
        for s in &neg {
            let mut got = s.parts.0.edges().to_vec();
            got.extend_from_slice(s.parts.1.edges());
            got.push(e);
            got.push(e.reverse());
            prop_assert_eq!(multiset(&got), all.clone());
        }
    }

    #[test]
    fn canonical_key_is_exactly_the_class(a in arb_loop(2, 6), b in arb_loop(2, 6), k in 0usize..20, shift in proptest::collection::vec(-5i32..=5, 2)) {
        let moved = a.rotated(k % a.len()).translate(&Vertex::new(&shift));
        prop_assert_eq!(a.canonical().key(), moved.canonical().key());
        prop_assert_eq!(a.canonical().key() == b.canonical().key(), class_of(&a) == class_of(&b));
        let c = a.canonical();
        let root = a.rotated(c.rotation);
        prop_assert_eq!(class_of(&root), class_of(&a));
    }

    #[test]
    fn balance_ignores_backtracks(l in arb_loop(2, 8), pick in any::<prop::sample::Index>(), axis in 0usize..2, sign in prop_oneof![Just(1i8), Just(-1i8)]) {
        let at = pick.index(l.len());
        let mut edges = l.edges().to_vec();
        let e = Edge::new(edges[at].tail, axis, sign);
        edges.splice(at..at, [e, e.reverse()]);
        let with = Loop::new(edges).unwrap();
        let p = plaquette0();
        for k in [PlaquetteAssignment::new(), PlaquetteAssignment::from_counts(&[(p.inverse(), 1)])] {
            prop_assert_eq!(is_balanced(std::slice::from_ref(&with), &k), is_balanced(std::slice::from_ref(&l), &k));
        }
    }
}
