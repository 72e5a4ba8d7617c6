//! Embedded maps as dart systems.
//!
//! Every dart carries the oriented lattice edge it traverses, a successor
//! `next` around its face and a `partner` across the map edge. Reading a
//! yellow face along `next` gives the plaquette boundary in its own
//! orientation, and reading an external face gives its boundary loop.
//! Blue faces are read in the same rotational sense, so their labels
//! alternate between `e` and `e^-1`.

use crate::assignments::PlaquetteAssignment;
use crate::lattice::{Edge, Plaquette, Vertex};
use crate::loops::Loop;
use crate::weights::Weights;
use num_bigint::BigInt;
use num_traits::One;
use serde::Serialize;
use std::collections::{BTreeMap, HashMap};

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FaceKind {
    Blue,
    Yellow,
    External,
}

#[derive(Clone, Debug)]
pub struct EmbeddedMap {
    pub(crate) next: Vec<u32>,
    pub(crate) partner: Vec<u32>,
    pub(crate) label: Vec<Edge>,
    pub(crate) kind: Vec<FaceKind>,
    /// Darts of each external face in loop order, root first.
    pub(crate) boundaries: Vec<Vec<u32>>,
}

/// Face decomposition: darts of each face and the face of each dart.
#[derive(Clone, Debug)]
pub struct Faces {
    pub list: Vec<Vec<u32>>,
    pub of: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ComponentTopology {
    pub v: usize,
    pub e: usize,
    pub f_internal: usize,
    pub b: usize,
    pub chi: i64,
    pub genus: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MapTopology {
    pub v: usize,
    pub e: usize,
    pub f_internal: usize,
    pub chi: i64,
    pub b: usize,
    pub c: usize,
    pub eta: i64,
    pub components: Vec<ComponentTopology>,
}

impl MapTopology {
    pub fn is_disk(&self) -> bool {
        self.c == 1 && self.b == 1 && self.components[0].genus == 0
    }
}

impl EmbeddedMap {
    pub fn from_parts(
        next: Vec<u32>,
        partner: Vec<u32>,
        label: Vec<Edge>,
        kind: Vec<FaceKind>,
        boundaries: Vec<Vec<u32>>,
    ) -> Self {
        EmbeddedMap { next, partner, label, kind, boundaries }
    }

    pub fn num_darts(&self) -> usize {
        self.next.len()
    }

    pub fn next(&self, d: u32) -> u32 {
        self.next[d as usize]
    }

    pub fn partner(&self, d: u32) -> u32 {
        self.partner[d as usize]
    }

    pub fn label(&self, d: u32) -> Edge {
        self.label[d as usize]
    }

    pub fn kind(&self, d: u32) -> FaceKind {
        self.kind[d as usize]
    }

    pub fn origin(&self, d: u32) -> Vertex {
        self.label[d as usize].tail
    }

    pub fn boundaries(&self) -> &[Vec<u32>] {
        &self.boundaries
    }

    pub fn prev(&self, d: u32) -> u32 {
        let mut x = d;
        loop {
            let n = self.next(x);
            if n == d {
                return x;
            }
            x = n;
        }
    }

    /// The boundary loops, read from the external faces.
    pub fn boundary_loops(&self) -> Vec<Loop> {
        self.boundaries
            .iter()
            .map(|b| Loop::new(b.iter().map(|&d| self.label(d)).collect()).expect("closed boundary"))
            .collect()
    }

    pub fn faces(&self) -> Faces {
        let n = self.num_darts();
        let mut of = vec![u32::MAX; n];
        let mut list = Vec::new();
        for s in 0..n {
            if of[s] != u32::MAX {
                continue;
            }
            let id = list.len() as u32;
            let mut f = Vec::new();
            let mut d = s as u32;
            while of[d as usize] == u32::MAX {
                of[d as usize] = id;
                f.push(d);
                d = self.next(d);
            }
            list.push(f);
        }
        Faces { list, of }
    }

    /// Vertex classes: orbits of `d ↦ next(partner(d))`, all darts in one
    /// orbit sharing their origin.
    pub fn vertices(&self) -> (usize, Vec<u32>) {
        let n = self.num_darts();
        let mut of = vec![u32::MAX; n];
        let mut count = 0u32;
        for s in 0..n {
            if of[s] != u32::MAX {
                continue;
            }
            let mut d = s as u32;
            while of[d as usize] == u32::MAX {
                of[d as usize] = count;
                d = self.next(self.partner(d));
            }
            count += 1;
        }
        (count as usize, of)
    }

    /// Connected components as a component id per dart.
    pub fn components(&self) -> (usize, Vec<u32>) {
        let n = self.num_darts();
        let mut of = vec![u32::MAX; n];
        let mut count = 0u32;
        for s in 0..n {
            if of[s] != u32::MAX {
                continue;
            }
            let mut stack = vec![s as u32];
            of[s] = count;
            while let Some(d) = stack.pop() {
                for x in [self.next(d), self.partner(d)] {
                    if of[x as usize] == u32::MAX {
                        of[x as usize] = count;
                        stack.push(x);
                    }
                }
            }
            count += 1;
        }
        (count as usize, of)
    }

    pub fn topology(&self) -> MapTopology {
        let faces = self.faces();
        let (nv, vof) = self.vertices();
        let (nc, cof) = self.components();
        let mut comps = vec![
            ComponentTopology { v: 0, e: 0, f_internal: 0, b: 0, chi: 0, genus: 0 };
            nc
        ];
        let mut seen_v = vec![false; nv];
        for d in 0..self.num_darts() {
            let c = &mut comps[cof[d] as usize];
            c.e += 1;
            if !seen_v[vof[d] as usize] {
                seen_v[vof[d] as usize] = true;
                c.v += 1;
            }
        }
        for f in &faces.list {
            let c = &mut comps[cof[f[0] as usize] as usize];
            if self.kind(f[0]) == FaceKind::External {
                c.b += 1;
            } else {
                c.f_internal += 1;
            }
        }
        for c in comps.iter_mut() {
            c.e /= 2;
            c.chi = c.v as i64 - c.e as i64 + c.f_internal as i64;
            c.genus = (2 - c.b as i64 - c.chi) / 2;
        }
        let v = comps.iter().map(|c| c.v).sum();
        let e = comps.iter().map(|c| c.e).sum();
        let f_internal = comps.iter().map(|c| c.f_internal).sum();
        let b = comps.iter().map(|c| c.b).sum::<usize>();
        let chi = comps.iter().map(|c| c.chi).sum::<i64>();
        MapTopology { v, e, f_internal, chi, b, c: nc, eta: chi - b as i64, components: comps }
    }

    /// Blue faces as (darts, unoriented edge).
    pub fn blue_faces(&self) -> Vec<(Vec<u32>, Edge)> {
        self.faces()
            .list
            .into_iter()
            .filter(|f| self.kind(f[0]) == FaceKind::Blue)
            .map(|f| {
                let e = self.label(f[0]).positive();
                (f, e)
            })
            .collect()
    }

    pub fn weight_with(&self, w: &Weights) -> BigInt {
        let mut out = BigInt::one();
        for (f, _) in self.blue_faces() {
            out *= w.face(f.len() / 2);
        }
        out
    }

    pub fn weight_infinity(&self) -> BigInt {
        self.weight_with(&Weights::standard())
    }

    /// Number of internal yellow faces.
    pub fn area(&self) -> usize {
        self.faces().list.iter().filter(|f| self.kind(f[0]) == FaceKind::Yellow).count()
    }

    /// Plaquette assignment read from the internal yellow faces.
    pub fn assignment(&self) -> PlaquetteAssignment {
        let mut k = PlaquetteAssignment::new();
        for f in self.faces().list {
            if self.kind(f[0]) == FaceKind::Yellow {
                let edges: Vec<Edge> = f.iter().map(|&d| self.label(d)).collect();
                if let Some(p) = Plaquette::from_cycle(&edges) {
                    k.add(p, 1);
                }
            }
        }
        k
    }

    /// Checks the dart system against the given boundary string and assignment.
    pub fn validate(&self, s: &[Loop], k: &PlaquetteAssignment) -> Result<(), Vec<String>> {
        let mut errs = Vec::new();
        let n = self.num_darts();
        let sizes = [self.partner.len(), self.label.len(), self.kind.len()];
        if sizes.iter().any(|&x| x != n) {
            return Err(vec!["inconsistent array lengths".into()]);
        }
        let mut hit = vec![false; n];
        for d in 0..n {
            let x = self.next[d] as usize;
            if x >= n || hit[x] {
                return Err(vec![format!("next is not a permutation at dart {d}")]);
            }
            hit[x] = true;
        }
        for d in 0..n as u32 {
            let p = self.partner(d);
            if p as usize >= n || p == d || self.partner(p) != d {
                errs.push(format!("dart {d}: partner is not a fixed-point-free involution"));
                continue;
            }
            if self.label(p) != self.label(d).reverse() {
                errs.push(format!("dart {d}: partner label is not reversed"));
            }
            let (a, b) = (self.kind(d), self.kind(p));
            if (a == FaceKind::Blue) == (b == FaceKind::Blue) {
                errs.push(format!("dart {d}: dual graph not bipartite ({a:?}|{b:?})"));
            }
            if self.label(d).head() != self.label(self.next(d)).tail {
                errs.push(format!("dart {d}: face walk is not continuous"));
            }
        }
        let faces = self.faces();
        let mut counts = PlaquetteAssignment::new();
        let mut external = Vec::new();
        for (fi, f) in faces.list.iter().enumerate() {
            let kind = self.kind(f[0]);
            if f.iter().any(|&d| self.kind(d) != kind) {
                errs.push(format!("face {fi}: mixed colors"));
                continue;
            }
            match kind {
                FaceKind::Blue => {
                    if f.len() % 2 == 1 {
                        errs.push(format!("face {fi}: blue face of odd degree {}", f.len()));
                    }
                    for &d in f {
                        if self.label(self.next(d)) != self.label(d).reverse() {
                            errs.push(format!("face {fi}: blue labels do not alternate at dart {d}"));
                            break;
                        }
                    }
                }
                FaceKind::Yellow => {
                    let edges: Vec<Edge> = f.iter().map(|&d| self.label(d)).collect();
                    match Plaquette::from_cycle(&edges) {
                        Some(p) => counts.add(p, 1),
                        None => errs.push(format!("face {fi}: yellow face is not a plaquette")),
                    }
                }
                FaceKind::External => external.push(fi),
            }
        }
        if counts != *k {
            errs.push(format!("plaquette counts {counts:?} differ from {k:?}"));
        }
        if external.len() != s.len() || self.boundaries.len() != s.len() {
            errs.push(format!("{} external faces for {} loops", external.len(), s.len()));
        } else {
            for (i, b) in self.boundaries.iter().enumerate() {
                let ok_cycle = !b.is_empty()
                    && (0..b.len()).all(|t| self.next(b[t]) == b[(t + 1) % b.len()])
                    && self.kind(b[0]) == FaceKind::External;
                if !ok_cycle {
                    errs.push(format!("boundary {i} is not an external face cycle"));
                    continue;
                }
                let read: Vec<Edge> = b.iter().map(|&d| self.label(d)).collect();
                if read != s[i].edges() {
                    errs.push(format!("boundary {i} reads {read:?}, expected {:?}", s[i]));
                }
            }
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(errs)
        }
    }

    /// Face adjacency: one vertex per face, one edge per map edge.
    pub fn dual_graph(&self) -> (Faces, Vec<(u32, u32)>) {
        let faces = self.faces();
        let mut edges = Vec::new();
        for d in 0..self.num_darts() as u32 {
            let p = self.partner(d);
            if d < p {
                edges.push((faces.of[d as usize], faces.of[p as usize]));
            }
        }
        (faces, edges)
    }

    fn connected_without(&self, faces: &Faces, removed: &[bool]) -> bool {
        let nf = faces.list.len();
        let start = match (0..nf).find(|&f| !removed[f]) {
            Some(s) => s,
            None => return true,
        };
        let mut seen = vec![false; nf];
        seen[start] = true;
        let mut stack = vec![start];
        while let Some(f) = stack.pop() {
            for &d in &faces.list[f] {
                let g = faces.of[self.partner(d) as usize] as usize;
                if !removed[g] && !seen[g] {
                    seen[g] = true;
                    stack.push(g);
                }
            }
        }
        (0..nf).all(|f| removed[f] || seen[f])
    }

    /// Blue face ids grouped by lattice edge.
    pub fn blue_faces_by_edge(&self, faces: &Faces) -> BTreeMap<Edge, Vec<usize>> {
        let mut by: BTreeMap<Edge, Vec<usize>> = BTreeMap::new();
        for (i, f) in faces.list.iter().enumerate() {
            if self.kind(f[0]) == FaceKind::Blue {
                by.entry(self.label(f[0]).positive()).or_default().push(i);
            }
        }
        by
    }

    /// No lattice edge's blue faces disconnect the dual graph. Checked per
    /// connected component.
    pub fn is_non_separable(&self) -> bool {
        let faces = self.faces();
        let nf = faces.list.len();
        for ids in self.blue_faces_by_edge(&faces).values() {
            let mut removed = vec![false; nf];
            for &i in ids {
                removed[i] = true;
            }
            if !self.connected_without_per_component(&faces, &removed) {
                return false;
            }
        }
        true
    }

    fn connected_without_per_component(&self, faces: &Faces, removed: &[bool]) -> bool {
        let (nc, cof) = self.components();
        if nc == 1 {
            return self.connected_without(faces, removed);
        }
        (0..nc as u32).all(|c| {
            let mut r = removed.to_vec();
            for (i, f) in faces.list.iter().enumerate() {
                if cof[f[0] as usize] != c {
                    r[i] = true;
                }
            }
            self.connected_without(faces, &r)
        })
    }

    /// Minimal families of blue faces over `e` whose removal disconnects
    /// the dual graph. Each family is a list of face ids of [`Self::faces`].
    pub fn enclosure_loops(&self, e: &Edge) -> Vec<Vec<usize>> {
        let faces = self.faces();
        let ids = self.blue_faces_by_edge(&faces).remove(&e.positive()).unwrap_or_default();
        assert!(ids.len() < 24, "too many blue faces for subset search");
        let nf = faces.list.len();
        let mut found: Vec<u32> = Vec::new();
        let mut masks: Vec<u32> = (1..(1u32 << ids.len())).collect();
        masks.sort_by_key(|m| m.count_ones());
        for m in masks {
            if found.iter().any(|f| f & m == *f) {
                continue;
            }
            let mut removed = vec![false; nf];
            for (b, &i) in ids.iter().enumerate() {
                if m >> b & 1 == 1 {
                    removed[i] = true;
                }
            }
            if !self.connected_without_per_component(&faces, &removed) {
                found.push(m);
            }
        }
        found
            .into_iter()
            .map(|m| (0..ids.len()).filter(|b| m >> b & 1 == 1).map(|b| ids[b]).collect())
            .collect()
    }

    /// Isomorphism-invariant code of the map rooted at its boundaries.
    pub fn canonical_code(&self) -> Vec<u8> {
        let n = self.num_darts();
        let mut idx = vec![u32::MAX; n];
        let mut order: Vec<u32> = Vec::with_capacity(n);
        let mut out = Vec::with_capacity(n * 16);
        for b in &self.boundaries {
            if let Some(&root) = b.first() {
                if idx[root as usize] == u32::MAX {
                    self.bfs(root, &mut idx, &mut order);
                }
            }
        }
        self.emit(&order, &idx, &mut out);
        // closed components: minimal code over all roots
        let mut closed: Vec<Vec<u8>> = Vec::new();
        let (_, cof) = self.components();
        let mut done: Vec<bool> = vec![false; n];
        for s in 0..n {
            if idx[s] != u32::MAX || done[s] {
                continue;
            }
            let comp: Vec<u32> = (0..n as u32).filter(|&d| cof[d as usize] == cof[s]).collect();
            let mut best: Option<Vec<u8>> = None;
            for &r in &comp {
                let mut li = vec![u32::MAX; n];
                let mut lo = Vec::new();
                self.bfs(r, &mut li, &mut lo);
                let mut code = Vec::new();
                self.emit(&lo, &li, &mut code);
                if best.as_ref().map_or(true, |b| code < *b) {
                    best = Some(code);
                }
            }
            for d in comp {
                done[d as usize] = true;
            }
            closed.push(best.expect("non-empty component"));
        }
        closed.sort();
        for c in closed {
            out.push(0xff);
            out.extend(c);
        }
        out
    }

    fn bfs(&self, root: u32, idx: &mut [u32], order: &mut Vec<u32>) {
        let base = order.len();
        idx[root as usize] = order.len() as u32;
        order.push(root);
        let mut head = base;
        while head < order.len() {
            let d = order[head];
            head += 1;
            for x in [self.next(d), self.partner(d)] {
                if idx[x as usize] == u32::MAX {
                    idx[x as usize] = order.len() as u32;
                    order.push(x);
                }
            }
        }
    }

    fn emit(&self, order: &[u32], idx: &[u32], out: &mut Vec<u8>) {
        out.extend((order.len() as u32).to_le_bytes());
        for &d in order {
            out.extend(idx[self.next(d) as usize].to_le_bytes());
            out.extend(idx[self.partner(d) as usize].to_le_bytes());
            let e = self.label(d);
            for c in e.tail.coords() {
                out.extend(c.to_le_bytes());
            }
            out.push(e.axis);
            out.push(e.sign as u8);
            out.push(self.kind(d) as u8);
        }
    }

    /// One JSON line describing the map.
    pub fn dump_json(&self) -> String {
        #[derive(Serialize)]
        struct DartJson {
            id: u32,
            next: u32,
            partner: u32,
            label: Edge,
            face: FaceKind,
        }
        #[derive(Serialize)]
        struct MapJson {
            darts: Vec<DartJson>,
            boundaries: Vec<Vec<u32>>,
            topology: MapTopology,
            weight: String,
        }
        let darts = (0..self.num_darts() as u32)
            .map(|d| DartJson {
                id: d,
                next: self.next(d),
                partner: self.partner(d),
                label: self.label(d),
                face: self.kind(d),
            })
            .collect();
        let m = MapJson {
            darts,
            boundaries: self.boundaries.clone(),
            topology: self.topology(),
            weight: self.weight_infinity().to_string(),
        };
        serde_json::to_string(&m).expect("serializable")
    }

    /// Keeps only darts with `keep[d]`, renumbering the rest in order.
    pub(crate) fn compact(&self, keep: &[bool]) -> EmbeddedMap {
        let mut newid = vec![u32::MAX; self.num_darts()];
        let mut c = 0u32;
        for d in 0..self.num_darts() {
            if keep[d] {
                newid[d] = c;
                c += 1;
            }
        }
        let map = |d: u32| {
            let x = newid[d as usize];
            debug_assert!(x != u32::MAX, "kept dart points at removed dart {d}");
            x
        };
        let mut m = EmbeddedMap {
            next: Vec::with_capacity(c as usize),
            partner: Vec::with_capacity(c as usize),
            label: Vec::with_capacity(c as usize),
            kind: Vec::with_capacity(c as usize),
            boundaries: Vec::new(),
        };
        for d in 0..self.num_darts() as u32 {
            if keep[d as usize] {
                m.next.push(map(self.next(d)));
                m.partner.push(map(self.partner(d)));
                m.label.push(self.label(d));
                m.kind.push(self.kind(d));
            }
        }
        m.boundaries = self.boundaries.iter().map(|b| b.iter().map(|&d| map(d)).collect()).collect();
        m
    }

    /// Half-degree of every blue face keyed by face id.
    pub fn blue_half_degrees(&self) -> HashMap<usize, usize> {
        let faces = self.faces();
        faces
            .list
            .iter()
            .enumerate()
            .filter(|(_, f)| self.kind(f[0]) == FaceKind::Blue)
            .map(|(i, f)| (i, f.len() / 2))
            .collect()
    }
}
