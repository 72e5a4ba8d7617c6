//! Brute-force enumeration of embedded maps by gluing yellow polygons
//! through blue faces.

use crate::assignments::PlaquetteAssignment;
use crate::lattice::Edge;
use crate::loops::{is_balanced, normalize_string, Loop};
use crate::maps::{EmbeddedMap, FaceKind};
use crate::weights::Weights;
use num_bigint::BigInt;
use num_traits::{One, Zero};
use parking_lot::Mutex;
use rayon::prelude::*;
use std::collections::{BTreeMap, HashMap};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EnumError {
    #[error("gluing search needs {needed} configurations, budget is {budget}")]
    Budget { needed: u128, budget: u128 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MapClass {
    All,
    Pm,
    Npm,
}

#[derive(Clone, Debug)]
pub struct Enumeration {
    /// Distinct maps, sorted by canonical code.
    pub maps: Vec<EmbeddedMap>,
    /// Number of gluing choices landing in the class.
    pub labeled_gluings: u64,
    /// Size of the full search space.
    pub search_size: u128,
}

impl Enumeration {
    pub fn weight_sum(&self, w: &Weights) -> BigInt {
        self.maps.iter().map(|m| m.weight_with(w)).sum()
    }
}

pub const DEFAULT_BUDGET: u128 = 50_000_000;

#[derive(Clone, Debug)]
pub struct Enumerator {
    pub budget: u128,
    pub weights: Weights,
}

impl Default for Enumerator {
    fn default() -> Self {
        Enumerator { budget: DEFAULT_BUDGET, weights: Weights::standard() }
    }
}

/// Yellow polygons plus, per unoriented edge, the sides to be glued.
struct Skeleton {
    yellow: usize,
    next: Vec<u32>,
    label: Vec<Edge>,
    kind: Vec<FaceKind>,
    boundaries: Vec<Vec<u32>>,
    groups: Vec<(Vec<u32>, Vec<u32>)>,
    n_loops: usize,
}

impl Skeleton {
    fn new(s: &[Loop], k: &PlaquetteAssignment) -> Skeleton {
        let mut next = Vec::new();
        let mut label = Vec::new();
        let mut kind = Vec::new();
        let mut boundaries = Vec::new();
        let mut polygon = |edges: &[Edge], fk: FaceKind| -> Vec<u32> {
            let start = label.len() as u32;
            let n = edges.len() as u32;
            for (i, e) in edges.iter().enumerate() {
                label.push(*e);
                kind.push(fk);
                next.push(start + (i as u32 + 1) % n);
            }
            (start..start + n).collect()
        };
        for l in s {
            boundaries.push(polygon(l.edges(), FaceKind::External));
        }
        for (p, c) in k.iter() {
            for _ in 0..c {
                polygon(&p.boundary(), FaceKind::Yellow);
            }
        }
        let mut by: BTreeMap<Edge, (Vec<u32>, Vec<u32>)> = BTreeMap::new();
        for (d, e) in label.iter().enumerate() {
            let g = by.entry(e.positive()).or_default();
            if e.is_positive() {
                g.0.push(d as u32);
            } else {
                g.1.push(d as u32);
            }
        }
        let yellow = label.len();
        Skeleton {
            yellow,
            next,
            label,
            kind,
            boundaries,
            groups: by.into_values().collect(),
            n_loops: s.len(),
        }
    }

    fn search_size(&self) -> u128 {
        self.groups
            .iter()
            .map(|(p, _)| {
                let f: u128 = (1..=p.len() as u128).product();
                f.saturating_mul(f)
            })
            .fold(1u128, |a, b| a.saturating_mul(b))
    }

    /// Builds the map for the given permutation pair per edge group.
    fn build(&self, perms: &[(&[u8], &[u8])]) -> EmbeddedMap {
        let y = self.yellow as u32;
        let n = 2 * self.yellow;
        let mut next = Vec::with_capacity(n);
        next.extend_from_slice(&self.next);
        next.resize(n, 0);
        for ((pos, neg), (f, g)) in self.groups.iter().zip(perms) {
            for (i, &a) in pos.iter().enumerate() {
                next[(a + y) as usize] = neg[f[i] as usize] + y;
            }
            for (i, &b) in neg.iter().enumerate() {
                next[(b + y) as usize] = pos[g[i] as usize] + y;
            }
        }
        let mut partner: Vec<u32> = (0..y).map(|d| d + y).collect();
        partner.extend(0..y);
        let mut label = self.label.clone();
        label.extend(self.label.iter().map(|e| e.reverse()));
        let mut kind = self.kind.clone();
        kind.resize(n, FaceKind::Blue);
        EmbeddedMap::from_parts(next, partner, label, kind, self.boundaries.clone())
    }

    /// Cheap necessary condition for a product of disks: χ equals the number
    /// of loops.
    fn euler_ok(&self, m: &EmbeddedMap) -> bool {
        let (v, _) = m.vertices();
        let faces = m.faces().list.len() - self.n_loops;
        v as i64 - self.yellow as i64 + faces as i64 == self.n_loops as i64
    }
}

fn permutations(n: usize) -> Vec<Vec<u8>> {
    let mut out = Vec::new();
    let mut cur: Vec<u8> = (0..n as u8).collect();
    heap_permute(n, &mut cur, &mut out);
    out.sort();
    out
}

fn heap_permute(k: usize, a: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
    if k <= 1 {
        out.push(a.clone());
        return;
    }
    for i in 0..k {
        heap_permute(k - 1, a, out);
        if k % 2 == 0 {
            a.swap(i, k - 1);
        } else {
            a.swap(0, k - 1);
        }
    }
}

/// True when every component is a planar disk carrying exactly one boundary.
pub fn is_disk_product(m: &EmbeddedMap, n_loops: usize) -> bool {
    let t = m.topology();
    t.c == n_loops && t.components.iter().all(|c| c.b == 1 && c.genus == 0)
}

impl Enumerator {
    pub fn new(budget: u128) -> Self {
        Enumerator { budget, ..Default::default() }
    }

    pub fn with_weights(mut self, weights: Weights) -> Self {
        self.weights = weights;
        self
    }

    /// All maps of the class with boundary `s` and assignment `k`.
    pub fn enumerate_class(
        &self,
        s: &[Loop],
        k: &PlaquetteAssignment,
        class: MapClass,
    ) -> Result<Enumeration, EnumError> {
        let s = normalize_string(s.to_vec());
        let empty = Enumeration { maps: Vec::new(), labeled_gluings: 0, search_size: 0 };
        if s.len() == 1 && s[0].is_null() || s.is_empty() {
            if k.is_empty() {
                let m = EmbeddedMap::from_parts(vec![], vec![], vec![], vec![], vec![]);
                return Ok(Enumeration { maps: vec![m], labeled_gluings: 1, search_size: 1 });
            }
            return Ok(empty);
        }
        if !is_balanced(&s, k) {
            return Ok(empty);
        }
        let sk = Skeleton::new(&s, k);
        let size = sk.search_size();
        if size > self.budget {
            return Err(EnumError::Budget { needed: size, budget: self.budget });
        }
        let mut perm_cache: HashMap<usize, Vec<Vec<u8>>> = HashMap::new();
        for (p, _) in &sk.groups {
            perm_cache.entry(p.len()).or_insert_with(|| permutations(p.len()));
        }
        let radices: Vec<u64> = sk.groups.iter().map(|(p, _)| (perm_cache[&p.len()].len() as u64).pow(2)).collect();
        let total: u64 = radices.iter().product();
        let found: Mutex<BTreeMap<Vec<u8>, EmbeddedMap>> = Mutex::new(BTreeMap::new());
        let labeled = std::sync::atomic::AtomicU64::new(0);
        let chunk = 4096u64;
        (0..total.div_ceil(chunk)).into_par_iter().for_each(|c| {
            let mut local: Vec<(Vec<u8>, EmbeddedMap)> = Vec::new();
            let mut hits = 0u64;
            for idx in c * chunk..((c + 1) * chunk).min(total) {
                let mut rest = idx;
                let mut perms: Vec<(&[u8], &[u8])> = Vec::with_capacity(radices.len());
                for ((p, _), r) in sk.groups.iter().zip(&radices) {
                    let digit = rest % r;
                    rest /= r;
                    let table = &perm_cache[&p.len()];
                    let nf = table.len() as u64;
                    perms.push((&table[(digit / nf) as usize], &table[(digit % nf) as usize]));
                }
                let m = sk.build(&perms);
                let keep = match class {
                    MapClass::All => true,
                    _ => {
                        sk.euler_ok(&m)
                            && is_disk_product(&m, sk.n_loops)
                            && (class == MapClass::Pm || m.is_non_separable())
                    }
                };
                if keep {
                    hits += 1;
                    local.push((m.canonical_code(), m));
                }
            }
            labeled.fetch_add(hits, std::sync::atomic::Ordering::Relaxed);
            if !local.is_empty() {
                let mut g = found.lock();
                for (code, m) in local {
                    g.entry(code).or_insert(m);
                }
            }
        });
        Ok(Enumeration {
            maps: found.into_inner().into_values().collect(),
            labeled_gluings: labeled.into_inner(),
            search_size: size,
        })
    }

    /// `Σ w_∞(M)` over the class for a single loop.
    pub fn surface_sum(&self, l: &Loop, k: &PlaquetteAssignment, class: MapClass) -> Result<BigInt, EnumError> {
        self.string_surface_sum(std::slice::from_ref(l), k, class)
    }

    pub fn string_surface_sum(
        &self,
        s: &[Loop],
        k: &PlaquetteAssignment,
        class: MapClass,
    ) -> Result<BigInt, EnumError> {
        Ok(self.enumerate_class(s, k, class)?.weight_sum(&self.weights))
    }
}

/// Memoized NPM surface sums, for evaluating many related terms.
pub struct OracleCache<'a> {
    pub enumerator: &'a Enumerator,
    memo: HashMap<(Loop, PlaquetteAssignment), BigInt>,
}

impl<'a> OracleCache<'a> {
    pub fn new(enumerator: &'a Enumerator) -> Self {
        OracleCache { enumerator, memo: HashMap::new() }
    }

    /// NPM sum of a single loop; the null loop gives `[K = 0]`.
    pub fn npm(&mut self, l: &Loop, k: &PlaquetteAssignment) -> Result<BigInt, EnumError> {
        if l.is_null() {
            return Ok(if k.is_empty() { BigInt::one() } else { BigInt::zero() });
        }
        if !is_balanced(std::slice::from_ref(l), k) {
            return Ok(BigInt::zero());
        }
        let key = (l.clone(), k.clone());
        if let Some(v) = self.memo.get(&key) {
            return Ok(v.clone());
        }
        let v = self.enumerator.surface_sum(l, k, MapClass::Npm)?;
        self.memo.insert(key, v.clone());
        Ok(v)
    }

    /// `Σ_{K1+K2=K} npm(ℓ1,K1) npm(ℓ2,K2)`.
    pub fn npm_pair(&mut self, a: &Loop, b: &Loop, k: &PlaquetteAssignment) -> Result<BigInt, EnumError> {
        let mut total = BigInt::zero();
        for (k1, k2) in k.decompositions() {
            if !is_balanced(std::slice::from_ref(a), &k1) || !is_balanced(std::slice::from_ref(b), &k2) {
                continue;
            }
            let x = self.npm(a, &k1)?;
            if x.is_zero() {
                continue;
            }
            total += x * self.npm(b, &k2)?;
        }
        Ok(total)
    }
}
