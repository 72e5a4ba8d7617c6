//! Pinching of blue faces and the cancellation identities built on it.
//!
//! A blue face `B` is addressed by its dart list (in `next` order). Corner
//! `i` of `B` is the vertex at the origin of `B[i]`; corners of equal parity
//! sit over the same lattice point and form one partite class.

use crate::maps::{EmbeddedMap, FaceKind};
use crate::weights::Weights;
use num_bigint::BigInt;
use num_traits::Zero;
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PinchError {
    #[error("corners {0} and {1} are in different classes")]
    ClassMismatch(usize, usize),
    #[error("degenerate pinching at corner {0}")]
    Degenerate(usize),
    #[error("corner {0} is not on the face")]
    OutOfRange(usize),
    #[error("face is not blue")]
    NotBlue,
    #[error("blue face vertices are not disjoint")]
    SharedVertices,
    #[error("face degree {0} is below 4")]
    TooSmall(usize),
    #[error("corners {0} and {1} no longer share a face")]
    Split(usize, usize),
}

/// Identifies corners `u` and `v` of a blue face.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pinching {
    pub u: usize,
    pub v: usize,
}

impl Pinching {
    pub fn new(u: usize, v: usize) -> Self {
        Pinching { u: u.min(v), v: u.max(v) }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Classification {
    Feasible,
    Resolved(Vec<Pinching>),
    NonFeasible,
}

fn check_face(m: &EmbeddedMap, face: &[u32]) -> Result<(), PinchError> {
    if face.is_empty() || m.kind(face[0]) != FaceKind::Blue {
        return Err(PinchError::NotBlue);
    }
    Ok(())
}

fn check_pair(face: &[u32], p: &Pinching) -> Result<(), PinchError> {
    if p.v >= face.len() {
        return Err(PinchError::OutOfRange(p.v));
    }
    if p.u == p.v {
        return Err(PinchError::Degenerate(p.u));
    }
    if (p.v - p.u) % 2 == 1 {
        return Err(PinchError::ClassMismatch(p.u, p.v));
    }
    Ok(())
}

fn swap_corners(m: &mut EmbeddedMap, a: u32, b: u32) {
    let pa = m.prev(a);
    let pb = m.prev(b);
    m.next[pa as usize] = b;
    m.next[pb as usize] = a;
}

pub(crate) fn same_face(m: &EmbeddedMap, a: u32, b: u32) -> bool {
    let mut x = m.next(a);
    while x != a {
        if x == b {
            return true;
        }
        x = m.next(x);
    }
    a == b
}

/// Splits the face at corners `u`, `v` into two faces sharing a vertex.
pub fn pinch(m: &EmbeddedMap, face: &[u32], p: Pinching) -> Result<EmbeddedMap, PinchError> {
    check_face(m, face)?;
    check_pair(face, &p)?;
    let mut out = m.clone();
    swap_corners(&mut out, face[p.u], face[p.v]);
    Ok(out)
}

/// Corners of the face sit on pairwise distinct vertices.
pub fn has_disjoint_vertices(m: &EmbeddedMap, face: &[u32]) -> bool {
    let (_, vof) = m.vertices();
    let ids: BTreeSet<u32> = face.iter().map(|&d| vof[d as usize]).collect();
    ids.len() == face.len()
}

/// The maps obtained by pinching corner `v` with each other corner of its class.
pub fn single_vertex_pinch_set(m: &EmbeddedMap, face: &[u32], v: usize) -> Result<Vec<EmbeddedMap>, PinchError> {
    check_face(m, face)?;
    if face.len() < 4 {
        return Err(PinchError::TooSmall(face.len()));
    }
    if v >= face.len() {
        return Err(PinchError::OutOfRange(v));
    }
    if !has_disjoint_vertices(m, face) {
        return Err(PinchError::SharedVertices);
    }
    (0..face.len())
        .filter(|&u| u != v && (u + face.len() - v) % 2 == 0)
        .map(|u| pinch(m, face, Pinching::new(u, v)))
        .collect()
}

fn crosses(a: &Pinching, b: &Pinching) -> bool {
    let inside = |x: usize| a.u < x && x < a.v;
    let ends = [b.u, b.v];
    if ends.iter().any(|&x| x == a.u || x == a.v) {
        return false;
    }
    inside(b.u) != inside(b.v)
}

fn blocks_cross(a: &[usize], b: &[usize]) -> bool {
    a.iter().flat_map(|&x| a.iter().map(move |&y| (x, y))).filter(|(x, y)| x < y).any(|(x, y)| {
        b.iter()
            .flat_map(|&z| b.iter().map(move |&w| (z, w)))
            .filter(|(z, w)| z < w)
            .any(|(z, w)| crosses(&Pinching::new(x, y), &Pinching::new(z, w)))
    })
}

fn find(parent: &mut [usize], x: usize) -> usize {
    let mut r = x;
    while parent[r] != r {
        r = parent[r];
    }
    let mut y = x;
    while parent[y] != r {
        let n = parent[y];
        parent[y] = r;
        y = n;
    }
    r
}

/// Blocks generated by a collection, after merging crossing same-class
/// blocks. `None` when an opposite-class crossing appears.
fn closure_blocks(size: usize, pins: &[Pinching]) -> Option<Vec<Vec<usize>>> {
    let mut parent: Vec<usize> = (0..size).collect();
    for p in pins {
        let (a, b) = (find(&mut parent, p.u), find(&mut parent, p.v));
        parent[a] = b;
    }
    loop {
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for x in 0..size {
            let r = find(&mut parent, x);
            groups.entry(r).or_default().push(x);
        }
        let blocks: Vec<Vec<usize>> = groups.into_values().filter(|b| b.len() > 1).collect();
        let mut merged = false;
        'outer: for i in 0..blocks.len() {
            for j in i + 1..blocks.len() {
                if blocks_cross(&blocks[i], &blocks[j]) {
                    if blocks[i][0] % 2 != blocks[j][0] % 2 {
                        return None;
                    }
                    let (a, b) = (find(&mut parent, blocks[i][0]), find(&mut parent, blocks[j][0]));
                    parent[a] = b;
                    merged = true;
                    break 'outer;
                }
            }
        }
        if !merged {
            return Some(blocks);
        }
    }
}

fn chain_pinchings(blocks: &[Vec<usize>]) -> Vec<Pinching> {
    blocks.iter().flat_map(|b| b.windows(2).map(|w| Pinching::new(w[0], w[1]))).collect()
}

/// Feasibility of a pinching collection on a face with `size` corners.
pub fn classify_collection(size: usize, pins: &[Pinching]) -> Result<Classification, PinchError> {
    let dummy: Vec<u32> = (0..size as u32).collect();
    for p in pins {
        check_pair(&dummy, p)?;
    }
    let mut same_class_crossing = false;
    for (i, a) in pins.iter().enumerate() {
        for b in &pins[i + 1..] {
            if crosses(a, b) {
                if a.u % 2 != b.u % 2 {
                    return Ok(Classification::NonFeasible);
                }
                same_class_crossing = true;
            }
        }
    }
    match closure_blocks(size, pins) {
        None => Ok(Classification::NonFeasible),
        Some(blocks) if same_class_crossing => Ok(Classification::Resolved(chain_pinchings(&blocks))),
        Some(_) => Ok(Classification::Feasible),
    }
}

/// Applies a collection. Resolved collections are replaced by their
/// resolution first; non-feasible ones return `None`.
pub fn apply_collection(m: &EmbeddedMap, face: &[u32], pins: &[Pinching]) -> Result<Option<EmbeddedMap>, PinchError> {
    check_face(m, face)?;
    let blocks = match classify_collection(face.len(), pins)? {
        Classification::NonFeasible => return Ok(None),
        _ => closure_blocks(face.len(), pins).expect("feasible"),
    };
    apply_partition(m, face, &blocks).map(Some)
}

/// Pinches every block of a non-crossing monochrome partition together.
pub fn apply_partition(m: &EmbeddedMap, face: &[u32], blocks: &[Vec<usize>]) -> Result<EmbeddedMap, PinchError> {
    let mut out = m.clone();
    for b in blocks {
        for w in b.windows(2) {
            let (a, c) = (face[w[0]], face[w[1]]);
            if !same_face(&out, a, c) {
                return Err(PinchError::Split(w[0], w[1]));
            }
            swap_corners(&mut out, a, c);
        }
    }
    Ok(out)
}

/// Non-crossing partitions of `0..n` (cyclically) whose blocks hold corners
/// of one parity only. Singletons are omitted from each partition.
pub fn monochrome_nc_partitions(n: usize) -> Vec<Vec<Vec<usize>>> {
    let pts: Vec<usize> = (0..n).collect();
    nc(&pts)
        .into_iter()
        .map(|p| p.into_iter().filter(|b| b.len() > 1).collect())
        .collect()
}

fn nc(pts: &[usize]) -> Vec<Vec<Vec<usize>>> {
    if pts.is_empty() {
        return vec![vec![]];
    }
    let first = pts[0];
    let rest = &pts[1..];
    let same: Vec<usize> = (0..rest.len()).filter(|&i| rest[i] % 2 == first % 2).collect();
    let mut out = Vec::new();
    for mask in 0..(1u64 << same.len()) {
        let chosen: Vec<usize> = (0..same.len()).filter(|b| mask >> b & 1 == 1).map(|b| same[b]).collect();
        let mut block = vec![first];
        block.extend(chosen.iter().map(|&i| rest[i]));
        // gaps between consecutive chosen positions are independent
        let mut gaps: Vec<&[usize]> = Vec::new();
        let mut prev = 0;
        for &i in &chosen {
            gaps.push(&rest[prev..i]);
            prev = i + 1;
        }
        gaps.push(&rest[prev..]);
        let mut partial: Vec<Vec<Vec<usize>>> = vec![vec![block]];
        for g in gaps {
            let sub = nc(g);
            let mut next = Vec::with_capacity(partial.len() * sub.len());
            for p in &partial {
                for s in &sub {
                    let mut q = p.clone();
                    q.extend(s.iter().cloned());
                    next.push(q);
                }
            }
            partial = next;
        }
        out.extend(partial);
    }
    out
}

/// Results of every feasible collection on the face, split into
/// non-separable (`valid`) and separable (`invalid`) maps.
pub struct AllCollections {
    pub valid: Vec<EmbeddedMap>,
    pub invalid: Vec<EmbeddedMap>,
}

impl AllCollections {
    pub fn valid_sum(&self, w: &Weights) -> BigInt {
        self.valid.iter().map(|m| m.weight_with(w)).sum()
    }

    pub fn total_sum(&self, w: &Weights) -> BigInt {
        self.valid.iter().chain(&self.invalid).map(|m| m.weight_with(w)).sum()
    }
}

pub fn all_collections(m: &EmbeddedMap, face: &[u32]) -> Result<AllCollections, PinchError> {
    check_face(m, face)?;
    if !has_disjoint_vertices(m, face) {
        return Err(PinchError::SharedVertices);
    }
    let mut seen: BTreeMap<Vec<u8>, (EmbeddedMap, bool)> = BTreeMap::new();
    for blocks in monochrome_nc_partitions(face.len()) {
        let r = apply_partition(m, face, &blocks)?;
        let ok = r.is_non_separable();
        seen.entry(r.canonical_code()).or_insert((r, ok));
    }
    let mut out = AllCollections { valid: Vec::new(), invalid: Vec::new() };
    for (_, (r, ok)) in seen {
        if ok {
            out.valid.push(r);
        } else {
            out.invalid.push(r);
        }
    }
    Ok(out)
}

/// Product of the weights of all blue faces other than `face`.
pub fn other_faces_weight(m: &EmbeddedMap, face: &[u32], w: &Weights) -> BigInt {
    let mut total = BigInt::from(1);
    for (f, _) in m.blue_faces() {
        if !f.contains(&face[0]) {
            total *= w.face(f.len() / 2);
        }
    }
    total
}

/// Same-class corner pairs `(u, v)` of the face joined by a chain of blue
/// faces over one lattice edge other than the face's own edge.
pub fn arcs(m: &EmbeddedMap, face: &[u32]) -> BTreeSet<(usize, usize)> {
    let (_, vof) = m.vertices();
    let faces = m.faces();
    let own = m.label(face[0]).positive();
    let mut out = BTreeSet::new();
    for (edge, ids) in m.blue_faces_by_edge(&faces) {
        if edge == own {
            continue;
        }
        // union faces over this edge through shared vertices
        let mut parent: Vec<usize> = (0..ids.len()).collect();
        let verts: Vec<BTreeSet<u32>> = ids
            .iter()
            .map(|&i| faces.list[i].iter().map(|&d| vof[d as usize]).collect())
            .collect();
        for a in 0..ids.len() {
            for b in a + 1..ids.len() {
                if !verts[a].is_disjoint(&verts[b]) {
                    let (x, y) = (find(&mut parent, a), find(&mut parent, b));
                    parent[x] = y;
                }
            }
        }
        let corner_groups: Vec<BTreeSet<usize>> = (0..face.len())
            .map(|c| {
                let v = vof[face[c] as usize];
                (0..ids.len()).filter(|&a| verts[a].contains(&v)).map(|a| find(&mut parent, a)).collect()
            })
            .collect();
        for u in 0..face.len() {
            for v in (u + 2..face.len()).step_by(2) {
                if !corner_groups[u].is_disjoint(&corner_groups[v]) {
                    out.insert((u, v));
                }
            }
        }
    }
    out
}

/// The structural statement about arcs: some arc `(u, v)`, read in one
/// direction around the face, has no opposite-class corner strictly
/// between its ends that is itself an arc endpoint.
pub fn arc_structure_holds(size: usize, arcs: &BTreeSet<(usize, usize)>) -> bool {
    if arcs.is_empty() {
        return true;
    }
    let endpoints: BTreeSet<usize> = arcs.iter().flat_map(|&(a, b)| [a, b]).collect();
    arcs.iter().any(|&(u, v)| {
        let between = |from: usize, to: usize| {
            let mut x = (from + 1) % size;
            let mut ok = true;
            while x != to {
                if (x + size - from) % 2 == 1 && endpoints.contains(&x) {
                    ok = false;
                }
                x = (x + 1) % size;
            }
            ok
        };
        between(u, v) || between(v, u)
    })
}

/// `w(M) + Σ w(M')` over single-vertex pinchings at `v`; zero by the
/// Catalan recursion.
pub fn single_vertex_defect(m: &EmbeddedMap, face: &[u32], v: usize, w: &Weights) -> Result<BigInt, PinchError> {
    let set = single_vertex_pinch_set(m, face, v)?;
    let mut total = m.weight_with(w);
    for r in set {
        total += r.weight_with(w);
    }
    Ok(total)
}

/// Whether the dichotomy holds on this face: the valid sum equals
/// the other faces' weight when nothing is invalid, and vanishes otherwise.
pub fn dichotomy_holds(m: &EmbeddedMap, face: &[u32], w: &Weights) -> Result<(bool, bool), PinchError> {
    let all = all_collections(m, face)?;
    let sum = all.valid_sum(w);
    let has_invalid = !all.invalid.is_empty();
    let expect = if has_invalid { BigInt::zero() } else { other_faces_weight(m, face, w) };
    Ok((sum == expect, has_invalid))
}
