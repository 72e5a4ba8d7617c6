//! Plaquette assignments and their bounded enumeration.

use crate::lattice::{plaquettes_containing, share_edge, Edge, Plaquette, Vertex};
use crate::loops::{is_balanced, Loop};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AssignmentError {
    #[error("plaquette {0:?} has count zero")]
    NotPresent(Plaquette),
    #[error("invalid assignment file: {0}")]
    Format(String),
}

/// A finite multiset of oriented plaquettes.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PlaquetteAssignment {
    entries: BTreeMap<Plaquette, u32>,
}

impl PlaquetteAssignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_counts(counts: &[(Plaquette, u32)]) -> Self {
        let mut k = Self::new();
        for (p, c) in counts {
            k.add(*p, *c);
        }
        k
    }

    pub fn get(&self, p: &Plaquette) -> u32 {
        self.entries.get(p).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (Plaquette, u32)> + '_ {
        self.entries.iter().map(|(p, c)| (*p, *c))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn area(&self) -> usize {
        self.entries.values().map(|&c| c as usize).sum()
    }

    pub fn add(&mut self, p: Plaquette, c: u32) {
        if c > 0 {
            *self.entries.entry(p).or_insert(0) += c;
        }
    }

    /// `K ∖ p`.
    pub fn remove(&self, p: &Plaquette) -> Result<Self, AssignmentError> {
        let mut k = self.clone();
        match k.entries.get_mut(p) {
            Some(c) if *c > 1 => *c -= 1,
            Some(_) => {
                k.entries.remove(p);
            }
            None => return Err(AssignmentError::NotPresent(*p)),
        }
        Ok(k)
    }

    pub fn sum(&self, other: &Self) -> Self {
        let mut k = self.clone();
        for (p, c) in other.iter() {
            k.add(p, c);
        }
        k
    }

    pub fn translate(&self, by: &Vertex) -> Self {
        Self { entries: self.entries.iter().map(|(p, c)| (p.translate(by), *c)).collect() }
    }

    /// Factorial product `Π K(p)!`.
    pub fn factorial_product(&self) -> u128 {
        self.entries.values().map(|&c| (1..=c as u128).product::<u128>()).product()
    }

    /// All ordered pairs `(K1, K2)` with `K1 + K2 = K`.
    pub fn decompositions(&self) -> Vec<(Self, Self)> {
        let items: Vec<(Plaquette, u32)> = self.iter().collect();
        let mut out = Vec::new();
        let mut digits = vec![0u32; items.len()];
        loop {
            let mut a = Self::new();
            let mut b = Self::new();
            for (i, (p, c)) in items.iter().enumerate() {
                a.add(*p, digits[i]);
                b.add(*p, c - digits[i]);
            }
            out.push((a, b));
            let mut i = 0;
            while i < items.len() {
                if digits[i] < items[i].1 {
                    digits[i] += 1;
                    break;
                }
                digits[i] = 0;
                i += 1;
            }
            if i == items.len() {
                return out;
            }
        }
    }

    /// Unoriented plaquettes of the support.
    pub fn support(&self) -> BTreeSet<Plaquette> {
        self.entries.keys().map(|p| p.unoriented()).collect()
    }

    /// Connected components of the support under edge sharing.
    pub fn support_components(&self) -> Vec<Vec<Plaquette>> {
        let supp: Vec<Plaquette> = self.support().into_iter().collect();
        let mut comp = vec![usize::MAX; supp.len()];
        let mut out = Vec::new();
        for s in 0..supp.len() {
            if comp[s] != usize::MAX {
                continue;
            }
            let id = out.len();
            let mut members = vec![supp[s]];
            comp[s] = id;
            let mut stack = vec![s];
            while let Some(i) = stack.pop() {
                for j in 0..supp.len() {
                    if comp[j] == usize::MAX && share_edge(&supp[i], &supp[j]) {
                        comp[j] = id;
                        members.push(supp[j]);
                        stack.push(j);
                    }
                }
            }
            out.push(members);
        }
        out
    }

    /// Every support component shares an unoriented edge with the loop.
    pub fn is_ell_connected(&self, l: &Loop) -> bool {
        let edges: HashSet<Edge> = l.edges().iter().map(|e| e.positive()).collect();
        self.support_components().iter().all(|c| {
            c.iter().any(|p| p.boundary().iter().any(|e| edges.contains(&e.positive())))
        })
    }

    /// Canonical text, used inside memo keys.
    pub fn key(&self) -> String {
        let parts: Vec<String> = self
            .entries
            .iter()
            .map(|(p, c)| {
                let b: Vec<String> = p.base.coords().iter().map(|x| x.to_string()).collect();
                format!(
                    "{}/{}{}{}*{}",
                    b.join(","),
                    p.axes.0 + 1,
                    p.axes.1 + 1,
                    if p.sign > 0 { '+' } else { '-' },
                    c
                )
            })
            .collect();
        parts.join(";")
    }

    pub fn to_json(&self) -> String {
        let v: Vec<AssignmentEntry> = self
            .entries
            .iter()
            .map(|(p, c)| AssignmentEntry { plaquette: *p, count: *c })
            .collect();
        serde_json::to_string(&v).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<Self, AssignmentError> {
        let v: Vec<AssignmentEntry> =
            serde_json::from_str(text).map_err(|e| AssignmentError::Format(e.to_string()))?;
        let mut k = Self::new();
        for e in v {
            k.add(e.plaquette, e.count);
        }
        Ok(k)
    }
}

#[derive(Serialize, Deserialize)]
struct AssignmentEntry {
    #[serde(flatten)]
    plaquette: Plaquette,
    count: u32,
}

impl fmt::Debug for PlaquetteAssignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.entries.iter()).finish()
    }
}

fn neighbours(p: &Plaquette) -> Vec<Plaquette> {
    let mut out = Vec::new();
    for e in p.boundary() {
        for q in plaquettes_containing(&e) {
            let q = q.unoriented();
            if q != p.unoriented() {
                out.push(q);
            }
        }
    }
    out
}

/// Supports (sets of unoriented plaquettes) of size ≤ `max` whose every
/// component touches an edge of `edges`.
fn connected_supports(edges: &[Edge], max: usize) -> Vec<Vec<Plaquette>> {
    let mut seeds: BTreeSet<Plaquette> = BTreeSet::new();
    for e in edges {
        for p in plaquettes_containing(e) {
            seeds.insert(p.unoriented());
        }
    }
    let mut all = Vec::new();
    let mut level: BTreeSet<Vec<Plaquette>> = seeds.iter().map(|p| vec![*p]).collect();
    for size in 1..=max {
        all.extend(level.iter().cloned());
        if size == max {
            break;
        }
        let mut nextl = BTreeSet::new();
        for s in &level {
            let mut cand: BTreeSet<Plaquette> = seeds.clone();
            for p in s {
                cand.extend(neighbours(p));
            }
            for c in cand {
                if s.binary_search(&c).is_err() {
                    let mut t = s.clone();
                    let pos = t.binary_search(&c).unwrap_err();
                    t.insert(pos, c);
                    nextl.insert(t);
                }
            }
        }
        level = nextl;
    }
    all
}

/// All balanced, ℓ-connected assignments with `1 ≤ area ≤ a_max`, sorted by
/// area and then by content.
pub fn enumerate_balanced_assignments(l: &Loop, a_max: usize) -> Vec<PlaquetteAssignment> {
    let edges: Vec<Edge> = {
        let mut v: Vec<Edge> = l.edges().iter().map(|e| e.positive()).collect();
        v.sort();
        v.dedup();
        v
    };
    let s = [l.clone()];
    let mut out = Vec::new();
    for supp in connected_supports(&edges, a_max) {
        let mut counts = vec![(0u32, 0u32); supp.len()];
        fill_counts(&supp, 0, a_max, &mut counts, &mut |c| {
            let mut k = PlaquetteAssignment::new();
            for (p, (a, b)) in supp.iter().zip(c) {
                k.add(*p, *a);
                k.add(p.inverse(), *b);
            }
            if is_balanced(&s, &k) {
                out.push(k);
            }
        });
    }
    out.sort_by(|a, b| a.area().cmp(&b.area()).then_with(|| a.cmp(b)));
    out
}

fn fill_counts(
    supp: &[Plaquette],
    i: usize,
    budget: usize,
    counts: &mut Vec<(u32, u32)>,
    emit: &mut dyn FnMut(&[(u32, u32)]),
) {
    if i == supp.len() {
        emit(counts);
        return;
    }
    // each remaining plaquette needs at least one copy
    let reserve = supp.len() - i - 1;
    for total in 1..=budget.saturating_sub(reserve) {
        for a in 0..=total {
            counts[i] = (a as u32, (total - a) as u32);
            fill_counts(supp, i + 1, budget - total, counts, emit);
        }
    }
}
