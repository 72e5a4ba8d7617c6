#![allow(dead_code)]

use latticeloop::lattice::{Edge, Plaquette, Vertex};
use latticeloop::loops::Loop;
use proptest::prelude::*;

/// Closes a walk from `start` given as (axis, sign) steps by walking back
/// along the axes in `order`.
pub fn closed_walk(start: Vertex, steps: &[(usize, i8)], order: &[usize]) -> Loop {
    let mut at = start;
    let mut edges = Vec::new();
    for &(a, s) in steps {
        let e = Edge::new(at, a, s);
        at = e.head();
        edges.push(e);
    }
    for &a in order {
        while at.coord(a) != start.coord(a) {
            let s = if at.coord(a) > start.coord(a) { -1 } else { 1 };
            let e = Edge::new(at, a, s);
            at = e.head();
            edges.push(e);
        }
    }
    Loop::new(edges).expect("closed by construction")
}

/// Random closed walks in dimension `dim`, backtracks allowed.
pub fn arb_loop(dim: usize, max_steps: usize) -> impl Strategy<Value = Loop> {
    (
        proptest::collection::vec(-3i32..=3, dim),
        proptest::collection::vec((0..dim, prop_oneof![Just(1i8), Just(-1i8)]), 1..=max_steps),
        Just((0..dim).collect::<Vec<usize>>()).prop_shuffle(),
    )
        .prop_map(|(base, steps, order)| closed_walk(Vertex::new(&base), &steps, &order))
}

pub fn arb_edge(dim: usize) -> impl Strategy<Value = Edge> {
    (proptest::collection::vec(-4i32..=4, dim), 0..dim, prop_oneof![Just(1i8), Just(-1i8)])
        .prop_map(|(c, a, s)| Edge::new(Vertex::new(&c), a, s))
}

pub fn plaquette0() -> Plaquette {
    Plaquette::new(Vertex::origin(2), 0, 1, 1)
}

pub fn lp(text: &str) -> Loop {
    Loop::parse(text, 2).expect("valid loop")
}
