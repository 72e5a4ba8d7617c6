//! Instance generators and verification suites shared by the CLI and tests.

use crate::assignments::{enumerate_balanced_assignments, PlaquetteAssignment};
use crate::enumerator::{EnumError, Enumerator, MapClass};
use crate::lattice::{Edge, Plaquette, Vertex};
use crate::loops::Loop;
use crate::pinching::{
    all_collections, arc_structure_holds, arcs, has_disjoint_vertices, other_faces_weight, pinch,
    single_vertex_defect, Pinching,
};
use crate::pps::verify_pps;
use crate::solver::{verify_mle, Solver};
use crate::weights::{w, Weights};
use num_bigint::BigInt;
use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeMap;

/// Backtrack-free closed walks of length ≤ `max_len` whose vertices lie in
/// `{0..side-1}^dim`, one representative per rotation/translation class.
pub fn window_loops(dim: usize, side: i32, max_len: usize) -> Vec<Loop> {
    let mut found: BTreeMap<String, Loop> = BTreeMap::new();
    let mut starts = vec![Vertex::origin(dim)];
    for axis in 0..dim {
        starts = starts
            .into_iter()
            .flat_map(|v| (0..side).map(move |c| v.step(axis, c as i8)))
            .collect();
    }
    for s in starts {
        let mut path = Vec::new();
        walk(s, s, side, max_len, &mut path, &mut found);
    }
    let mut out: Vec<Loop> = found.into_values().collect();
    out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    out
}

fn inside(v: &Vertex, side: i32) -> bool {
    v.coords().iter().all(|&c| (0..side).contains(&c))
}

fn walk(start: Vertex, at: Vertex, side: i32, max_len: usize, path: &mut Vec<Edge>, found: &mut BTreeMap<String, Loop>) {
    if !path.is_empty() && at == start {
        let l = Loop::new(path.clone()).expect("closed");
        if !l.has_backtrack() {
            let c = l.canonical();
            found.entry(c.key()).or_insert(l);
        }
    }
    if path.len() == max_len {
        return;
    }
    for axis in 0..at.dim() {
        for sign in [1i8, -1] {
            let e = Edge::new(at, axis, sign);
            if path.last() == Some(&e.reverse()) || !inside(&e.head(), side) {
                continue;
            }
            path.push(e);
            walk(start, e.head(), side, max_len, path, found);
            path.pop();
        }
    }
}

/// A loop together with a plaquette assignment.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    pub l: Loop,
    pub k: PlaquetteAssignment,
}

impl Instance {
    pub fn describe(&self) -> String {
        format!("[{}] K={}", self.l.to_text(), self.k.key())
    }
}

/// Every window loop of length ≤ `max_len` with each of its balanced
/// ℓ-connected assignments of area ≤ `max_area`.
pub fn window_instances(dim: usize, max_len: usize, max_area: usize) -> Vec<Instance> {
    window_loops(dim, 3, max_len)
        .into_iter()
        .flat_map(|l| {
            enumerate_balanced_assignments(&l, max_area)
                .into_iter()
                .map(move |k| Instance { l: l.clone(), k })
        })
        .collect()
}

/// A lattice symmetry: coordinate `a` goes to coordinate `perm[a]` with
/// sign `flip[a]`.
#[derive(Clone, Debug)]
pub struct Symmetry {
    pub perm: Vec<usize>,
    pub flip: Vec<i8>,
}

impl Symmetry {
    pub fn vertex(&self, v: &Vertex) -> Vertex {
        let mut c = vec![0; v.dim()];
        for (a, &x) in v.coords().iter().enumerate() {
            c[self.perm[a]] = self.flip[a] as i32 * x;
        }
        Vertex::new(&c)
    }

    pub fn edge(&self, e: &Edge) -> Edge {
        let a = e.axis as usize;
        Edge::new(self.vertex(&e.tail), self.perm[a], e.sign * self.flip[a])
    }

    pub fn plaquette(&self, p: &Plaquette) -> Plaquette {
        let bd = p.boundary().map(|e| self.edge(&e));
        Plaquette::from_cycle(&bd).expect("symmetries map plaquettes to plaquettes")
    }

    pub fn instance(&self, x: &Instance) -> Instance {
        let l = Loop::new(x.l.edges().iter().map(|e| self.edge(e)).collect()).expect("closed");
        let mut k = PlaquetteAssignment::new();
        for (p, c) in x.k.iter() {
            k.add(self.plaquette(&p), c);
        }
        Instance { l, k }
    }
}

/// `count` window instances, each moved by a random lattice symmetry,
/// translation and rotation of the loop. Distinct as concrete inputs.
pub fn random_instances(dim: usize, max_len: usize, max_area: usize, count: usize, seed: u64) -> Vec<Instance> {
    let base = window_instances(dim, max_len, max_area);
    if base.is_empty() {
        return Vec::new();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = std::collections::BTreeSet::new();
    let mut out = Vec::new();
    let mut attempts = 0;
    while out.len() < count && attempts < 100 * count {
        attempts += 1;
        let x = &base[rng.gen_range(0..base.len())];
        let mut perm: Vec<usize> = (0..dim).collect();
        perm.shuffle(&mut rng);
        let flip = (0..dim).map(|_| if rng.gen_bool(0.5) { 1 } else { -1 }).collect();
        let y = Symmetry { perm, flip }.instance(x);
        let shift: Vec<i32> = (0..dim).map(|_| rng.gen_range(-4..=4)).collect();
        let by = Vertex::new(&shift);
        let l = y.l.translate(&by).rotated(rng.gen_range(0..y.l.len()));
        let k = y.k.translate(&by);
        if seen.insert((l.clone(), k.key())) {
            out.push(Instance { l, k });
        }
    }
    out
}

/// The plaquette `p` with `K = {p⁻¹, q, q⁻¹}` for a neighbour `q`: balanced
/// and non-trivial, but every planar map is separable.
pub fn all_separable_instance() -> Instance {
    let p = Plaquette::new(Vertex::origin(2), 0, 1, 1);
    let q = Plaquette::new(Vertex::new(&[1, 0]), 0, 1, 1);
    Instance {
        l: Loop::from_plaquette(&p),
        k: PlaquetteAssignment::from_counts(&[(p.inverse(), 1), (q, 1), (q.inverse(), 1)]),
    }
}

/// The plaquette `p` with `K(p) = 1, K(p⁻¹) = 2`, whose maps carry blue
/// faces with invalid pinchings.
pub fn invalid_pinching_instance() -> Instance {
    let p = Plaquette::new(Vertex::origin(2), 0, 1, 1);
    Instance { l: Loop::from_plaquette(&p), k: PlaquetteAssignment::from_counts(&[(p, 1), (p.inverse(), 2)]) }
}

/// Outcome of a verification suite.
#[derive(Clone, Debug, Default, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub instances: usize,
    pub checks: usize,
    pub failures: Vec<String>,
    pub stats: BTreeMap<String, u64>,
}

impl SuiteReport {
    fn new(suite: &str) -> Self {
        SuiteReport { suite: suite.into(), ..Default::default() }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failures.push(what());
        }
    }

    fn bump(&mut self, key: &str, by: u64) {
        *self.stats.entry(key.into()).or_insert(0) += by;
    }

    fn absorb(&mut self, other: SuiteReport) {
        self.instances += other.instances;
        self.checks += other.checks;
        self.failures.extend(other.failures);
        for (k, v) in other.stats {
            *self.stats.entry(k).or_insert(0) += v;
        }
    }
}

/// Runs `f` on every instance in parallel and merges the partial reports in
/// input order.
fn per_instance<F>(name: &str, xs: &[Instance], f: F) -> Result<SuiteReport, EnumError>
where
    F: Fn(&Instance, &mut SuiteReport) -> Result<(), EnumError> + Sync,
{
    let parts: Vec<Result<SuiteReport, EnumError>> = xs
        .par_iter()
        .map(|x| {
            let mut r = SuiteReport::new(name);
            r.instances = 1;
            f(x, &mut r)?;
            Ok(r)
        })
        .collect();
    let mut out = SuiteReport::new(name);
    for p in parts {
        out.absorb(p?);
    }
    Ok(out)
}

/// The weight table against the Catalan numbers and their recursion.
pub fn check_weights(weights: &Weights) -> SuiteReport {
    let mut r = SuiteReport::new("weights");
    for (i, want) in [1, -1, 2, -5, 14].into_iter().enumerate() {
        let got = weights.face(i + 1);
        r.check(got == BigInt::from(want), || format!("w{} = {got}, expected {want}", i + 1));
        r.check(w(i + 1) == BigInt::from(want), || format!("closed form w{} wrong", i + 1));
    }
    for k in 2..=12 {
        let d = weights.catalan_defect(k);
        r.check(d.is_zero(), || format!("Catalan recursion at k={k} leaves {d}"));
    }
    r
}

/// Solver against the enumerated non-separable surface sum.
pub fn check_oracle(xs: &[Instance], solver: &Solver, en: &Enumerator) -> Result<SuiteReport, EnumError> {
    per_instance("oracle", xs, |x, r| {
        let a = solver.phi_k(&x.l, &x.k);
        let b = en.surface_sum(&x.l, &x.k, MapClass::Npm)?;
        if !b.is_zero() {
            r.bump("nonzero", 1);
        }
        r.check(a == b, || format!("{}: solver {a}, enumeration {b}", x.describe()));
        Ok(())
    })
}

/// Both sides of the loop equation by enumeration at every edge, plus the
/// solver with its first pivot forced to every edge.
pub fn check_mle(xs: &[Instance], solver: &Solver, en: &Enumerator) -> Result<SuiteReport, EnumError> {
    per_instance("mle", xs, |x, r| {
        let base = solver.phi_k(&x.l, &x.k);
        for pos in 0..x.l.len() {
            let m = verify_mle(&x.l, &x.k, pos, en)?;
            if m.lhs.is_zero() {
                r.bump("empty_lhs", 1);
            }
            r.check(m.holds(), || format!("{} at {pos}: {} vs {}", x.describe(), m.lhs, m.rhs));
            let at = solver.phi_k_at(&x.l, &x.k, pos);
            r.check(at == base, || format!("{} pivot {pos}: {at} vs {base}", x.describe()));
        }
        Ok(())
    })
}

/// Inserts `e e⁻¹` at a random position of a random instance's loop, up to
/// `depth` times, and compares both engines with the reduced loop.
pub fn check_backtrack(
    xs: &[Instance],
    count: usize,
    depth: usize,
    seed: u64,
    solver: &Solver,
    en: &Enumerator,
) -> Result<SuiteReport, EnumError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut injected = Vec::with_capacity(count);
    for _ in 0..count {
        let x = &xs[rng.gen_range(0..xs.len())];
        let mut edges = x.l.edges().to_vec();
        for _ in 0..rng.gen_range(1..=depth) {
            let at = rng.gen_range(0..=edges.len());
            let v = if at < edges.len() { edges[at].tail } else { edges[0].tail };
            let e = Edge::new(v, rng.gen_range(0..v.dim()), if rng.gen_bool(0.5) { 1 } else { -1 });
            edges.splice(at..at, [e, e.reverse()]);
        }
        injected.push((x.clone(), Loop::new(edges).expect("still closed")));
    }
    let parts: Vec<Result<SuiteReport, EnumError>> = injected
        .par_iter()
        .map(|(x, with)| {
            let mut r = SuiteReport::new("backtrack");
            r.instances = 1;
            let a = solver.phi_k(with, &x.k);
            let b = solver.phi_k(&x.l, &x.k);
            r.check(a == b, || format!("{} with [{}]: solver {a} vs {b}", x.describe(), with.to_text()));
            let c = en.surface_sum(with, &x.k, MapClass::Npm)?;
            let d = en.surface_sum(&x.l, &x.k, MapClass::Npm)?;
            r.check(c == d, || format!("{} with [{}]: enumeration {c} vs {d}", x.describe(), with.to_text()));
            Ok(r)
        })
        .collect();
    let mut out = SuiteReport::new("backtrack");
    for p in parts {
        out.absorb(p?);
    }
    Ok(out)
}

/// Pinching identities on every blue face of degree ≥ 4 of every
/// non-separable map of the instances.
pub fn check_pinching(xs: &[Instance], en: &Enumerator) -> Result<SuiteReport, EnumError> {
    let wt = &en.weights;
    let mut out = per_instance("pinching", xs, |x, r| {
        let maps = en.enumerate_class(std::slice::from_ref(&x.l), &x.k, MapClass::Npm)?.maps;
        for m in &maps {
            for (face, _) in m.blue_faces() {
                if face.len() < 4 {
                    continue;
                }
                if !has_disjoint_vertices(m, &face) {
                    r.bump("faces_shared_vertices", 1);
                    continue;
                }
                r.bump("faces", 1);
                let tag = || format!("{} face of degree {}", x.describe(), face.len());
                for v in 0..face.len() {
                    let d = single_vertex_defect(m, &face, v, wt).expect("valid face");
                    r.check(d.is_zero(), || format!("{}: single vertex defect {d} at corner {v}", tag()));
                }
                let all = all_collections(m, &face).expect("valid face");
                let c = other_faces_weight(m, &face, wt);
                let total = all.total_sum(wt);
                r.check(total == c, || format!("{}: all pinchings sum {total}, expected {c}", tag()));
                let valid = all.valid_sum(wt);
                let expect = if all.invalid.is_empty() { c.clone() } else { BigInt::zero() };
                r.check(valid == expect, || format!("{}: valid pinchings sum {valid}, expected {expect}", tag()));
                let a = arcs(m, &face);
                if !all.invalid.is_empty() {
                    r.bump("faces_with_invalid", 1);
                    r.check(!a.is_empty(), || format!("{}: invalid pinching without arcs", tag()));
                }
                r.check(arc_structure_holds(face.len(), &a), || format!("{}: arc structure fails", tag()));
                for &(u, v) in &a {
                    let pinched = pinch(m, &face, Pinching::new(u, v)).expect("same class");
                    r.check(!pinched.is_non_separable(), || format!("{}: pinching arc ({u},{v}) stays non-separable", tag()));
                }
            }
        }
        Ok(())
    })?;
    let invalid = out.stats.get("faces_with_invalid").copied().unwrap_or(0);
    out.check(invalid > 0, || "no blue face with an invalid pinching was met".into());
    Ok(out)
}

/// The pinching-peeling-separating process at every edge of every instance.
pub fn check_pps(xs: &[Instance], en: &Enumerator) -> Result<SuiteReport, EnumError> {
    per_instance("pps", xs, |x, r| {
        for pos in 0..x.l.len() {
            let rep = verify_pps(&x.l.rotated(pos), &x.k, en)?;
            r.bump("maps", rep.maps as u64);
            r.checks += rep.checks;
            for f in rep.failures {
                r.failures.push(format!("{} at {pos}: {f}", x.describe()));
            }
        }
        Ok(())
    })
}

/// Negative and positive bad sets carry the same total weight.
pub fn check_cancellation(xs: &[Instance], en: &Enumerator) -> Result<SuiteReport, EnumError> {
    per_instance("cancellation", xs, |x, r| {
        if x.k.is_empty() {
            return Ok(());
        }
        for pos in 0..x.l.len() {
            let rep = verify_pps(&x.l.rotated(pos), &x.k, en)?;
            if !rep.negative_bad_sum.is_zero() {
                r.bump("nonzero_bad_sums", 1);
            }
            r.check(rep.negative_bad_sum == rep.positive_bad_sum, || {
                format!("{} at {pos}: negative bad {} vs positive bad {}", x.describe(), rep.negative_bad_sum, rep.positive_bad_sum)
            });
        }
        Ok(())
    })
}

/// Each non-separable map is hit by exactly `Π K(p)!` labeled gluings.
pub fn check_rigidity(xs: &[Instance], en: &Enumerator) -> Result<SuiteReport, EnumError> {
    per_instance("rigidity", xs, |x, r| {
        let e = en.enumerate_class(std::slice::from_ref(&x.l), &x.k, MapClass::Npm)?;
        let want = x.k.factorial_product() * e.maps.len() as u128;
        let got = e.labeled_gluings as u128;
        r.check(got == want, || format!("{}: {got} labeled gluings, expected {want}", x.describe()));
        Ok(())
    })
}

/// Weight of the maps one would drop by discarding every map that has a
/// blue face with an invalid pinching, together with the valid pinchings
/// of such faces. Returns the total and the number of dropped maps.
pub fn invalid_exclusion_sum(x: &Instance, en: &Enumerator) -> Result<(BigInt, usize), EnumError> {
    let maps = en.enumerate_class(std::slice::from_ref(&x.l), &x.k, MapClass::Npm)?.maps;
    let mut dropped: BTreeMap<Vec<u8>, BigInt> = BTreeMap::new();
    for m in &maps {
        for (face, _) in m.blue_faces() {
            if face.len() < 4 || !has_disjoint_vertices(m, &face) {
                continue;
            }
            let all = all_collections(m, &face).expect("valid face");
            if all.invalid.is_empty() {
                continue;
            }
            for r in std::iter::once(m).chain(&all.valid) {
                dropped.insert(r.canonical_code(), r.weight_with(&en.weights));
            }
        }
    }
    Ok((dropped.values().sum(), dropped.len()))
}
