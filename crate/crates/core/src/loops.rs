//! Loop algebra: parsing, backtrack erasure, splittings, mergers,
//! deformations, edge counts and canonical keys.

use crate::assignments::PlaquetteAssignment;
use crate::lattice::{plaquettes_containing, Edge, Plaquette, Vertex};
use std::collections::HashMap;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LoopError {
    #[error("parse error at column {column}: {message}")]
    Parse { column: usize, message: String },
    #[error("edges {0} and {1} do not connect")]
    NotClosed(usize, usize),
    #[error("position {0} out of range for loop of length {1}")]
    OutOfRange(usize, usize),
    #[error("edge mismatch at merge: {0:?} vs {1:?}")]
    EdgeMismatch(Edge, Edge),
}

/// A rooted closed walk. The empty sequence is the null loop.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Loop {
    edges: Vec<Edge>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Positive,
    Negative,
}

/// A splitting of a loop at a pivot, with the index of the partner copy.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Splitting {
    pub partner: usize,
    pub parts: (Loop, Loop),
}

impl Loop {
    pub fn new(edges: Vec<Edge>) -> Result<Self, LoopError> {
        let n = edges.len();
        for i in 0..n {
            if edges[i].head() != edges[(i + 1) % n].tail {
                return Err(LoopError::NotClosed(i, (i + 1) % n));
            }
        }
        Ok(Loop { edges })
    }

    pub fn null() -> Self {
        Loop { edges: Vec::new() }
    }

    pub fn from_plaquette(p: &Plaquette) -> Self {
        Loop { edges: p.boundary().to_vec() }
    }

    /// Parses `"@x,y +1 +2 -1 -2"`; the base prefix is optional.
    pub fn parse(text: &str, dim: usize) -> Result<Self, LoopError> {
        let mut base = Vertex::origin(dim);
        let mut edges = Vec::new();
        let mut first = true;
        for (column, tok) in tokens_with_columns(text) {
            let err = |message: String| LoopError::Parse { column, message };
            if let Some(rest) = tok.strip_prefix('@') {
                if !first {
                    return Err(err("base prefix must come first".into()));
                }
                let coords: Result<Vec<i32>, _> = rest.split(',').map(|c| c.trim().parse()).collect();
                let coords = coords.map_err(|_| err(format!("bad base '{tok}'")))?;
                if coords.len() != dim {
                    return Err(err(format!("base has {} coordinates, expected {dim}", coords.len())));
                }
                base = Vertex::new(&coords);
            } else {
                let sign = match tok.as_bytes()[0] {
                    b'+' => 1,
                    b'-' => -1,
                    _ => return Err(err(format!("expected ±k, found '{tok}'"))),
                };
                let axis: usize = tok[1..].parse().map_err(|_| err(format!("bad axis in '{tok}'")))?;
                if axis == 0 || axis > dim {
                    return Err(err(format!("axis {axis} outside 1..={dim}")));
                }
                let tail = edges.last().map(|e: &Edge| e.head()).unwrap_or(base);
                edges.push(Edge::new(tail, axis - 1, sign));
            }
            first = false;
        }
        if let (Some(a), Some(b)) = (edges.first(), edges.last()) {
            if b.head() != a.tail {
                return Err(LoopError::Parse {
                    column: text.len() + 1,
                    message: format!("walk ends at {:?}, not at its start {:?}", b.head(), a.tail),
                });
            }
        }
        Ok(Loop { edges })
    }

    /// Text tokens, with a base prefix when the loop does not start at the origin.
    pub fn tokens(&self) -> Vec<String> {
        let mut out = Vec::new();
        if let Some(e) = self.edges.first() {
            if e.tail.coords().iter().any(|&c| c != 0) {
                let c: Vec<String> = e.tail.coords().iter().map(|c| c.to_string()).collect();
                out.push(format!("@{}", c.join(",")));
            }
        }
        out.extend(self.edges.iter().map(|e| e.token()));
        out
    }

    pub fn to_text(&self) -> String {
        self.tokens().join(" ")
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_null(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn dim(&self) -> Option<usize> {
        self.edges.first().map(|e| e.tail.dim())
    }

    /// The same loop rooted at position `k`.
    pub fn rotated(&self, k: usize) -> Loop {
        let mut edges = self.edges.clone();
        if !edges.is_empty() {
            edges.rotate_left(k % self.edges.len());
        }
        Loop { edges }
    }

    pub fn translate(&self, by: &Vertex) -> Loop {
        Loop { edges: self.edges.iter().map(|e| e.translate(by)).collect() }
    }

    pub fn count(&self, e: &Edge) -> usize {
        self.edges.iter().filter(|x| *x == e).count()
    }

    pub fn has_backtrack(&self) -> bool {
        let n = self.len();
        (0..n).any(|i| self.edges[(i + 1) % n] == self.edges[i].reverse())
    }

    /// Removes adjacent `e e^-1` pairs, cyclically, until none remain.
    pub fn erase_backtracks(&self) -> Loop {
        let mut stack: Vec<Edge> = Vec::with_capacity(self.len());
        for e in &self.edges {
            if stack.last() == Some(&e.reverse()) {
                stack.pop();
            } else {
                stack.push(*e);
            }
        }
        let (mut lo, mut hi) = (0, stack.len());
        while hi - lo >= 2 && stack[hi - 1] == stack[lo].reverse() {
            lo += 1;
            hi -= 1;
        }
        Loop { edges: stack[lo..hi].to_vec() }
    }

    fn check(&self, at: usize) -> Result<Edge, LoopError> {
        self.edges.get(at).copied().ok_or(LoopError::OutOfRange(at, self.len()))
    }

    /// `π₁𝐞π₂𝐞′π₃ ↦ (π₁𝐞π₃, π₂𝐞′)` for every other copy 𝐞′ of the pivot edge.
    pub fn positive_splittings(&self, at: usize) -> Result<Vec<Splitting>, LoopError> {
        let e = self.check(at)?;
        let ed = &self.edges;
        let mut out = Vec::new();
        for j in (0..self.len()).filter(|&j| j != at && ed[j] == e) {
            let (a, b) = if j > at {
                let mut a = ed[..=at].to_vec();
                a.extend_from_slice(&ed[j + 1..]);
                (a, ed[at + 1..=j].to_vec())
            } else {
                let mut a = vec![ed[at]];
                a.extend_from_slice(&ed[j + 1..at]);
                let mut b = ed[at + 1..].to_vec();
                b.extend_from_slice(&ed[..=j]);
                (a, b)
            };
            out.push(Splitting { partner: j, parts: (Loop { edges: a }, Loop { edges: b }) });
        }
        Ok(out)
    }

    /// `π₁𝐞π₂𝐞⁻¹π₃ ↦ (π₁π₃, π₂)` for every copy of the reversed pivot edge.
    pub fn negative_splittings(&self, at: usize) -> Result<Vec<Splitting>, LoopError> {
        let r = self.check(at)?.reverse();
        let ed = &self.edges;
        let mut out = Vec::new();
        for j in (0..self.len()).filter(|&j| ed[j] == r) {
            let (a, b) = if j > at {
                let mut a = ed[..at].to_vec();
                a.extend_from_slice(&ed[j + 1..]);
                (a, ed[at + 1..j].to_vec())
            } else {
                let mut b = ed[at + 1..].to_vec();
                b.extend_from_slice(&ed[..j]);
                (ed[j + 1..at].to_vec(), b)
            };
            out.push(Splitting { partner: j, parts: (Loop { edges: a }, Loop { edges: b }) });
        }
        Ok(out)
    }

    /// Positive: `π₁𝐞π₄π₃𝐞′π₂`. Negative: `π₁π₄π₃π₂`.
    pub fn merge(l1: &Loop, at1: usize, l2: &Loop, at2: usize, mode: Mode) -> Result<Loop, LoopError> {
        let e = l1.check(at1)?;
        let f = l2.check(at2)?;
        let want = match mode {
            Mode::Positive => e,
            Mode::Negative => e.reverse(),
        };
        if f != want {
            return Err(LoopError::EdgeMismatch(want, f));
        }
        let (p1, p2) = (&l1.edges[..at1], &l1.edges[at1 + 1..]);
        let (p3, p4) = (&l2.edges[..at2], &l2.edges[at2 + 1..]);
        let mut out = Vec::with_capacity(l1.len() + l2.len());
        out.extend_from_slice(p1);
        if mode == Mode::Positive {
            out.push(e);
        }
        out.extend_from_slice(p4);
        out.extend_from_slice(p3);
        if mode == Mode::Positive {
            out.push(f);
        }
        out.extend_from_slice(p2);
        Ok(Loop { edges: out })
    }

    /// `ℓ ⊕ q` for q containing the pivot edge, or `ℓ ⊖ p` for p containing its reverse.
    pub fn deformations(&self, at: usize, mode: Mode) -> Result<Vec<(Loop, Plaquette)>, LoopError> {
        let e = self.check(at)?;
        let target = match mode {
            Mode::Positive => e,
            Mode::Negative => e.reverse(),
        };
        plaquettes_containing(&target)
            .into_iter()
            .map(|p| {
                let pl = Loop::from_plaquette(&p);
                let k = p.position_of(&target).expect("plaquette contains edge");
                Loop::merge(self, at, &pl, k, mode).map(|l| (l, p))
            })
            .collect()
    }

    /// Minimal step encoding over rotations and translations.
    pub fn canonical(&self) -> CanonicalLoop {
        let n = self.len();
        if n == 0 {
            return CanonicalLoop { steps: Vec::new(), rotation: 0, offset: None };
        }
        let steps: Vec<u8> = self.edges.iter().map(step_code).collect();
        let mut best = 0;
        for r in 1..n {
            let better = (0..n)
                .map(|t| steps[(r + t) % n].cmp(&steps[(best + t) % n]))
                .find(|c| c.is_ne())
                .map_or(false, |c| c.is_lt());
            if better {
                best = r;
            }
        }
        let mut s = steps;
        s.rotate_left(best);
        CanonicalLoop { steps: s, rotation: best, offset: Some(self.edges[best].tail.neg()) }
    }
}

fn step_code(e: &Edge) -> u8 {
    e.axis * 2 + u8::from(e.sign < 0)
}

fn tokens_with_columns(text: &str) -> impl Iterator<Item = (usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in text.char_indices() {
        if c.is_whitespace() {
            if let Some(s) = start.take() {
                out.push((s + 1, &text[s..i]));
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push((s + 1, &text[s..]));
    }
    out.into_iter()
}

impl fmt::Debug for Loop {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_null() {
            write!(f, "∅")
        } else {
            write!(f, "[{}]", self.to_text())
        }
    }
}

/// Canonical form of a loop up to rotation and translation.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CanonicalLoop {
    pub steps: Vec<u8>,
    /// Position of the original loop that becomes the first edge.
    pub rotation: usize,
    /// Translation moving the first edge's tail to the origin.
    pub offset: Option<Vertex>,
}

impl CanonicalLoop {
    pub fn key(&self) -> String {
        self.steps
            .iter()
            .map(|s| format!("{}{}", if s % 2 == 0 { '+' } else { '-' }, s / 2 + 1))
            .collect()
    }
}

/// Drops null loops unless nothing else remains.
pub fn normalize_string(s: Vec<Loop>) -> Vec<Loop> {
    let kept: Vec<Loop> = s.iter().filter(|l| !l.is_null()).cloned().collect();
    if kept.is_empty() && !s.is_empty() {
        vec![Loop::null()]
    } else {
        kept
    }
}

/// Copies of `e` in the string plus plaquette copies of K carrying `e`.
pub fn n_e(s: &[Loop], k: &PlaquetteAssignment, e: &Edge) -> usize {
    let in_loops: usize = s.iter().map(|l| l.count(e)).sum();
    let in_k: usize = plaquettes_containing(e).iter().map(|p| k.get(p) as usize).sum();
    in_loops + in_k
}

/// Net oriented edge counts, keyed by positive edge.
pub fn edge_balance(s: &[Loop], k: &PlaquetteAssignment) -> HashMap<Edge, i64> {
    let mut net: HashMap<Edge, i64> = HashMap::new();
    let mut add = |e: &Edge, c: i64| {
        *net.entry(e.positive()).or_insert(0) += if e.is_positive() { c } else { -c };
    };
    for l in s {
        for e in l.edges() {
            add(e, 1);
        }
    }
    for (p, c) in k.iter() {
        for e in p.boundary() {
            add(&e, c as i64);
        }
    }
    net.retain(|_, v| *v != 0);
    net
}

pub fn is_balanced(s: &[Loop], k: &PlaquetteAssignment) -> bool {
    edge_balance(s, k).is_empty()
}
