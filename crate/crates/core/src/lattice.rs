//! Vertices, oriented edges and oriented plaquettes of the hypercubic lattice.

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;

pub const MAX_DIM: usize = 6;

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Vertex {
    coords: [i32; MAX_DIM],
    dim: u8,
}

impl Vertex {
    pub fn origin(dim: usize) -> Self {
        assert!((2..=MAX_DIM).contains(&dim), "dimension {dim} out of range");
        Vertex { coords: [0; MAX_DIM], dim: dim as u8 }
    }

    pub fn new(coords: &[i32]) -> Self {
        let mut v = Vertex::origin(coords.len());
        v.coords[..coords.len()].copy_from_slice(coords);
        v
    }

    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    pub fn coords(&self) -> &[i32] {
        &self.coords[..self.dim as usize]
    }

    pub fn coord(&self, axis: usize) -> i32 {
        self.coords[axis]
    }

    pub fn step(&self, axis: usize, sign: i8) -> Self {
        let mut v = *self;
        v.coords[axis] += sign as i32;
        v
    }

    pub fn add(&self, other: &Vertex) -> Self {
        let mut v = *self;
        for i in 0..self.dim() {
            v.coords[i] += other.coords[i];
        }
        v
    }

    pub fn sub(&self, other: &Vertex) -> Self {
        let mut v = *self;
        for i in 0..self.dim() {
            v.coords[i] -= other.coords[i];
        }
        v
    }

    pub fn neg(&self) -> Self {
        Vertex::origin(self.dim()).sub(self)
    }
}

impl fmt::Debug for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords().iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl Serialize for Vertex {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.coords().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Vertex {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v: Vec<i32> = Vec::deserialize(d)?;
        if !(2..=MAX_DIM).contains(&v.len()) {
            return Err(serde::de::Error::custom(format!("bad dimension {}", v.len())));
        }
        Ok(Vertex::new(&v))
    }
}

/// An oriented nearest-neighbour edge. `axis` is zero based internally.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub tail: Vertex,
    pub axis: u8,
    pub sign: i8,
}

impl Edge {
    pub fn new(tail: Vertex, axis: usize, sign: i8) -> Self {
        assert!(axis < tail.dim() && (sign == 1 || sign == -1));
        Edge { tail, axis: axis as u8, sign }
    }

    pub fn head(&self) -> Vertex {
        self.tail.step(self.axis as usize, self.sign)
    }

    pub fn reverse(&self) -> Edge {
        Edge { tail: self.head(), axis: self.axis, sign: -self.sign }
    }

    pub fn is_positive(&self) -> bool {
        self.sign > 0
    }

    /// The positively oriented representative of the unoriented edge.
    pub fn positive(&self) -> Edge {
        if self.is_positive() {
            *self
        } else {
            self.reverse()
        }
    }

    pub fn translate(&self, by: &Vertex) -> Edge {
        Edge { tail: self.tail.add(by), ..*self }
    }

    /// Token of the loop text format, e.g. `+1` or `-3`.
    pub fn token(&self) -> String {
        format!("{}{}", if self.sign > 0 { '+' } else { '-' }, self.axis + 1)
    }
}

impl fmt::Debug for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}{}", self.tail, self.token())
    }
}

#[derive(Serialize, Deserialize)]
struct EdgeJson {
    tail: Vertex,
    axis: usize,
    sign: i8,
}

impl Serialize for Edge {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        EdgeJson { tail: self.tail, axis: self.axis as usize + 1, sign: self.sign }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Edge {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let j = EdgeJson::deserialize(d)?;
        if j.axis == 0 || j.axis > j.tail.dim() || (j.sign != 1 && j.sign != -1) {
            return Err(serde::de::Error::custom("invalid edge"));
        }
        Ok(Edge::new(j.tail, j.axis - 1, j.sign))
    }
}

/// An oriented unit square. `base` is its lexicographically smallest corner
/// and `axes.0 < axes.1` (zero based).
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Plaquette {
    pub base: Vertex,
    pub axes: (u8, u8),
    pub sign: i8,
}

impl Plaquette {
    pub fn new(base: Vertex, i: usize, j: usize, sign: i8) -> Self {
        assert!(i < j && j < base.dim() && (sign == 1 || sign == -1));
        Plaquette { base, axes: (i as u8, j as u8), sign }
    }

    pub fn inverse(&self) -> Plaquette {
        Plaquette { sign: -self.sign, ..*self }
    }

    /// The same square with positive orientation.
    pub fn unoriented(&self) -> Plaquette {
        Plaquette { sign: 1, ..*self }
    }

    pub fn translate(&self, by: &Vertex) -> Plaquette {
        Plaquette { base: self.base.add(by), ..*self }
    }

    /// Boundary edges in traversal order, starting at `base`.
    ///
    /// The positive orientation leaves `base` along the larger axis, which in
    /// the plane is the leftmost edge pointing up.
    pub fn boundary(&self) -> [Edge; 4] {
        let (i, j) = (self.axes.0 as usize, self.axes.1 as usize);
        let b = self.base;
        if self.sign > 0 {
            [
                Edge::new(b, j, 1),
                Edge::new(b.step(j, 1), i, 1),
                Edge::new(b.step(i, 1).step(j, 1), j, -1),
                Edge::new(b.step(i, 1), i, -1),
            ]
        } else {
            [
                Edge::new(b, i, 1),
                Edge::new(b.step(i, 1), j, 1),
                Edge::new(b.step(i, 1).step(j, 1), i, -1),
                Edge::new(b.step(j, 1), j, -1),
            ]
        }
    }

    pub fn contains(&self, e: &Edge) -> bool {
        self.boundary().contains(e)
    }

    pub fn position_of(&self, e: &Edge) -> Option<usize> {
        self.boundary().iter().position(|x| x == e)
    }

    /// Recovers the plaquette from a closed 4-cycle of edges.
    pub fn from_cycle(edges: &[Edge]) -> Option<Plaquette> {
        if edges.len() != 4 {
            return None;
        }
        let base = edges.iter().map(|e| e.tail).min()?;
        let mut axes: Vec<usize> = edges.iter().map(|e| e.axis as usize).collect();
        axes.sort_unstable();
        axes.dedup();
        if axes.len() != 2 {
            return None;
        }
        for sign in [1, -1] {
            let p = Plaquette::new(base, axes[0], axes[1], sign);
            let bd = p.boundary();
            let k = match bd.iter().position(|e| *e == edges[0]) {
                Some(k) => k,
                None => continue,
            };
            if (0..4).all(|t| bd[(k + t) % 4] == edges[t]) {
                return Some(p);
            }
        }
        None
    }
}

impl fmt::Debug for Plaquette {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "P{:?}[{},{}]{}",
            self.base,
            self.axes.0 + 1,
            self.axes.1 + 1,
            if self.sign > 0 { '+' } else { '-' }
        )
    }
}

#[derive(Serialize, Deserialize)]
pub(crate) struct PlaquetteJson {
    pub base: Vertex,
    pub axes: [usize; 2],
    pub sign: i8,
}

impl PlaquetteJson {
    pub(crate) fn into_plaquette(self) -> Result<Plaquette, String> {
        let [i, j] = self.axes;
        let d = self.base.dim();
        if i == 0 || i >= j || j > d || (self.sign != 1 && self.sign != -1) {
            return Err("invalid plaquette".into());
        }
        Ok(Plaquette::new(self.base, i - 1, j - 1, self.sign))
    }
}

impl From<&Plaquette> for PlaquetteJson {
    fn from(p: &Plaquette) -> Self {
        PlaquetteJson {
            base: p.base,
            axes: [p.axes.0 as usize + 1, p.axes.1 as usize + 1],
            sign: p.sign,
        }
    }
}

impl Serialize for Plaquette {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        PlaquetteJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Plaquette {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        PlaquetteJson::deserialize(d)?.into_plaquette().map_err(serde::de::Error::custom)
    }
}

/// All oriented plaquettes whose boundary contains `e`, sorted.
pub fn plaquettes_containing(e: &Edge) -> Vec<Plaquette> {
    let d = e.tail.dim();
    let a = e.axis as usize;
    let lo = e.positive().tail;
    let mut out = Vec::with_capacity(2 * (d - 1));
    for b in (0..d).filter(|&b| b != a) {
        for off in [0, -1] {
            let base = lo.step(b, off);
            let (i, j) = if a < b { (a, b) } else { (b, a) };
            let p = Plaquette::new(base, i, j, 1);
            out.push(if p.contains(e) { p } else { p.inverse() });
        }
    }
    out.sort();
    out
}

/// Unoriented edges shared by two plaquettes.
pub fn share_edge(p: &Plaquette, q: &Plaquette) -> bool {
    let a = p.boundary().map(|e| e.positive());
    q.boundary().iter().any(|e| a.contains(&e.positive()))
}
