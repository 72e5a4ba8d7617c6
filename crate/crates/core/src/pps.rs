//! The pinching-peeling-separating process at the root edge of a disk.
//!
//! For a map `M` with boundary `ℓ = 𝐞π`, rooted at the dart `x0` carrying
//! `𝐞`, the blue face behind `x0` is either a 2-gon (peel one plaquette or
//! split off a sub-loop) or larger (pinch, then merge a plaquette into the
//! boundary or split the boundary).

use crate::assignments::PlaquetteAssignment;
use crate::enumerator::{is_disk_product, EnumError, Enumerator, MapClass};
use crate::lattice::{plaquettes_containing, Edge, Plaquette};
use crate::loops::{normalize_string, Loop};
use crate::maps::{EmbeddedMap, FaceKind};
use num_bigint::BigInt;
use num_traits::Zero;
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PpsError {
    #[error("map must have exactly one non-empty boundary")]
    Boundary,
    #[error("map has no plaquettes")]
    NoPlaquettes,
    #[error("yellow face is not a plaquette")]
    NotPlaquette,
}

/// Result of taking the pinched map `M_k` one step further.
#[derive(Clone, Debug)]
pub enum PinchedResult {
    PositiveDeformation { plaquette: Plaquette, map: EmbeddedMap },
    PositiveSplitting { partner: usize, map: EmbeddedMap },
}

#[derive(Clone, Debug)]
pub struct PinchedStep {
    pub k: usize,
    pub pinched: EmbeddedMap,
    pub result: PinchedResult,
}

#[derive(Clone, Debug)]
pub enum PpsOutcome {
    NegativeDeformation { plaquette: Plaquette, map: EmbeddedMap },
    NegativeSplitting { partner: usize, map: EmbeddedMap },
    Pinched(Vec<PinchedStep>),
}

fn face_of_four(m: &EmbeddedMap, y: u32) -> Result<([u32; 4], Plaquette), PpsError> {
    let a = m.next(y);
    let b = m.next(a);
    let c = m.next(b);
    if m.next(c) != y {
        return Err(PpsError::NotPlaquette);
    }
    let f = [y, a, b, c];
    let p = Plaquette::from_cycle(&f.map(|d| m.label(d))).ok_or(PpsError::NotPlaquette)?;
    Ok((f, p))
}

fn drop_empty(mut m: EmbeddedMap) -> EmbeddedMap {
    m.boundaries.retain(|b| !b.is_empty());
    m
}

/// One step of the process at the root of the single boundary.
pub fn pps_step(m: &EmbeddedMap) -> Result<PpsOutcome, PpsError> {
    if m.boundaries.len() != 1 || m.boundaries[0].is_empty() {
        return Err(PpsError::Boundary);
    }
    let bd = m.boundaries[0].clone();
    let n = bd.len();
    let pos = |d: u32| bd.iter().position(|&x| x == d);
    let x0 = bd[0];
    let b0 = m.partner(x0);
    let mut blue = vec![b0];
    let mut d = m.next(b0);
    while d != b0 {
        blue.push(d);
        d = m.next(d);
    }
    let delta = blue.len() / 2;
    if delta == 1 {
        let t = blue[1];
        let y = m.partner(t);
        let mut out = m.clone();
        let mut keep = vec![true; m.num_darts()];
        for z in [x0, b0, t, y] {
            keep[z as usize] = false;
        }
        if m.kind(y) == FaceKind::Yellow {
            let ([_, a, b, c], p) = face_of_four(m, y)?;
            out.next[bd[n - 1] as usize] = a;
            out.next[c as usize] = bd[1];
            for z in [a, b, c] {
                out.kind[z as usize] = FaceKind::External;
            }
            let mut nb = vec![a, b, c];
            nb.extend_from_slice(&bd[1..]);
            out.boundaries = vec![nb];
            return Ok(PpsOutcome::NegativeDeformation { plaquette: p, map: out.compact(&keep) });
        }
        let j = pos(y).expect("external partner lies on the boundary");
        let part1 = bd[j + 1..].to_vec();
        let part2 = bd[1..j].to_vec();
        if let (Some(&first), Some(&last)) = (part1.first(), part1.last()) {
            out.next[last as usize] = first;
        }
        if let (Some(&first), Some(&last)) = (part2.first(), part2.last()) {
            out.next[last as usize] = first;
        }
        out.boundaries = vec![part1, part2];
        return Ok(PpsOutcome::NegativeSplitting { partner: j, map: drop_empty(out.compact(&keep)) });
    }
    let mut steps = Vec::new();
    for k in 1..delta {
        let mut pinched = m.clone();
        pinched.next[b0 as usize] = blue[2 * k + 1];
        pinched.next[blue[2 * k] as usize] = blue[1];
        let y = m.partner(blue[2 * k]);
        let mut out = pinched.clone();
        let result = if m.kind(y) == FaceKind::Yellow {
            let ([_, dd, f, g], q) = face_of_four(m, y)?;
            out.next[bd[n - 1] as usize] = y;
            out.next[g as usize] = x0;
            for z in [y, dd, f, g] {
                out.kind[z as usize] = FaceKind::External;
            }
            let mut nb = vec![y, dd, f, g];
            nb.extend_from_slice(&bd);
            out.boundaries = vec![nb];
            PinchedResult::PositiveDeformation { plaquette: q, map: out }
        } else {
            let j = pos(y).expect("external partner lies on the boundary");
            out.next[bd[n - 1] as usize] = bd[j];
            out.next[bd[j - 1] as usize] = x0;
            let part1 = bd[j..].to_vec();
            let mut part2 = bd[1..j].to_vec();
            part2.push(x0);
            out.boundaries = vec![part1, part2];
            PinchedResult::PositiveSplitting { partner: j, map: out }
        };
        steps.push(PinchedStep { k, pinched, result });
    }
    Ok(PpsOutcome::Pinched(steps))
}

/// Undoes a negative deformation: `N` has boundary `e_a e_b e_c π`; the
/// plaquette `p` (containing `e⁻¹`) and a blue 2-gon are glued back.
pub fn negative_inverse(n: &EmbeddedMap, e: Edge) -> EmbeddedMap {
    let bd = n.boundaries[0].clone();
    let len = bd.len();
    let mut m = n.clone();
    let base = m.num_darts() as u32;
    let (x0, y, b0, t) = (base, base + 1, base + 2, base + 3);
    m.label.extend([e, e.reverse(), e.reverse(), e]);
    m.kind.extend([FaceKind::External, FaceKind::Yellow, FaceKind::Blue, FaceKind::Blue]);
    m.partner.extend([b0, t, x0, y]);
    m.next.extend([0; 4]);
    let (a, c) = (bd[0], bd[2]);
    m.next[y as usize] = a;
    m.next[c as usize] = y;
    for z in &bd[..3] {
        m.kind[*z as usize] = FaceKind::Yellow;
    }
    m.next[bd[len - 1] as usize] = x0;
    m.next[x0 as usize] = bd[3 % len];
    m.next[b0 as usize] = t;
    m.next[t as usize] = b0;
    let mut nb = vec![x0];
    nb.extend_from_slice(&bd[3..]);
    m.boundaries = vec![nb];
    m
}

/// Undoes a positive deformation: `N` has boundary `e e_d e_f e_g e π`.
/// Returns `None` when the two blue faces behind the copies of `e` coincide.
pub fn positive_inverse(n: &EmbeddedMap) -> Option<EmbeddedMap> {
    let bd = n.boundaries[0].clone();
    let len = bd.len();
    let (y, g, x0) = (bd[0], bd[3], bd[4]);
    let mut m = n.clone();
    m.next[bd[len - 1] as usize] = x0;
    m.next[g as usize] = y;
    for z in &bd[..4] {
        m.kind[*z as usize] = FaceKind::Yellow;
    }
    m.boundaries = vec![bd[4..].to_vec()];
    let (b0, by) = (m.partner(x0), m.partner(y));
    if crate::pinching::same_face(&m, b0, by) {
        return None;
    }
    let (nb0, nby) = (m.next(b0), m.next(by));
    m.next[b0 as usize] = nby;
    m.next[by as usize] = nb0;
    Some(m)
}

/// Vertex ids reachable from `start` through blue faces over `e` that
/// share vertices.
fn blue_chain(m: &EmbeddedMap, e: Edge, start_faces: &[usize]) -> BTreeSet<usize> {
    let faces = m.faces();
    let (_, vof) = m.vertices();
    let ids = m.blue_faces_by_edge(&faces).remove(&e.positive()).unwrap_or_default();
    let verts: Vec<BTreeSet<u32>> =
        ids.iter().map(|&i| faces.list[i].iter().map(|&d| vof[d as usize]).collect()).collect();
    let mut reached: BTreeSet<usize> = start_faces.iter().copied().collect();
    let mut changed = true;
    while changed {
        changed = false;
        for (a, &fa) in ids.iter().enumerate() {
            if reached.contains(&fa) {
                continue;
            }
            let touches = ids
                .iter()
                .enumerate()
                .any(|(b, fb)| reached.contains(fb) && !verts[a].is_disjoint(&verts[b]));
            if touches {
                reached.insert(fa);
                changed = true;
            }
        }
    }
    reached
}

/// Obstruction for `N ∈ NPM(ℓ ⊖ p)`: blue faces over `e` connect the start
/// and the end of `π`.
pub fn is_negative_bad(n: &EmbeddedMap, e: Edge) -> bool {
    let bd = &n.boundaries[0];
    let faces = n.faces();
    let (_, vof) = n.vertices();
    let u = vof[bd[3 % bd.len()] as usize];
    let v = vof[bd[0] as usize];
    let by = n.blue_faces_by_edge(&faces).remove(&e.positive()).unwrap_or_default();
    let touching = |vertex: u32| -> Vec<usize> {
        by.iter().copied().filter(|&f| faces.list[f].iter().any(|&d| vof[d as usize] == vertex)).collect()
    };
    let start = touching(u);
    if start.is_empty() {
        return false;
    }
    let reach = blue_chain(n, e, &start);
    touching(v).iter().any(|f| reach.contains(f))
}

/// Obstruction for `N ∈ NPM(ℓ ⊕ q)`: the blue faces behind the two copies
/// of `e` coincide or are chained by blue faces over `e`.
pub fn is_positive_bad(n: &EmbeddedMap, e: Edge) -> bool {
    let bd = &n.boundaries[0];
    let faces = n.faces();
    let f0 = faces.of[n.partner(bd[0]) as usize] as usize;
    let f4 = faces.of[n.partner(bd[4]) as usize] as usize;
    f0 == f4 || blue_chain(n, e, &[f0]).contains(&f4)
}

/// The deformed loop, with the pivot at position 0.
pub fn deformed_loop(l: &Loop, p: &Plaquette, positive: bool) -> Loop {
    let e = l.edges()[0];
    let target = if positive { e } else { e.reverse() };
    let mode = if positive { crate::loops::Mode::Positive } else { crate::loops::Mode::Negative };
    let j = p.position_of(&target).expect("plaquette carries the edge");
    Loop::merge(l, 0, &Loop::from_plaquette(p), j, mode).expect("matching edges")
}

/// Members of the deformed class that carry the obstruction. `l` has the
/// pivot at position 0; `positive` selects `ℓ ⊕ q` over `ℓ ⊖ p`.
pub fn bad_set(
    l: &Loop,
    k: &PlaquetteAssignment,
    p: &Plaquette,
    positive: bool,
    en: &Enumerator,
) -> Result<Vec<EmbeddedMap>, EnumError> {
    let e = l.edges()[0];
    let rest = k.remove(p).expect("plaquette present in K");
    let target = deformed_loop(l, p, positive);
    let maps = en.enumerate_class(&[target], &rest, MapClass::Npm)?.maps;
    Ok(maps
        .into_iter()
        .filter(|n| if positive { is_positive_bad(n, e) } else { is_negative_bad(n, e) })
        .collect())
}

/// Outcome of checking the process on every map of `NPM(ℓ, K)`.
#[derive(Clone, Debug, Default)]
pub struct PpsReport {
    pub maps: usize,
    pub checks: usize,
    pub failures: Vec<String>,
    pub negative_bad_sum: BigInt,
    pub positive_bad_sum: BigInt,
}

impl PpsReport {
    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failures.push(what());
        }
    }
}

struct Target {
    loops: Vec<Loop>,
    k: PlaquetteAssignment,
    codes: BTreeMap<Vec<u8>, EmbeddedMap>,
    image: BTreeMap<Vec<u8>, usize>,
}

impl Target {
    fn new(loops: Vec<Loop>, k: PlaquetteAssignment, en: &Enumerator) -> Result<Self, EnumError> {
        let loops = normalize_string(loops);
        let maps = en.enumerate_class(&loops, &k, MapClass::Npm)?.maps;
        let codes = maps.into_iter().map(|m| (m.canonical_code(), m)).collect();
        Ok(Target { loops, k, codes, image: BTreeMap::new() })
    }

    fn hit(&mut self, n: &EmbeddedMap, report: &mut PpsReport, tag: &str) {
        let valid = if self.loops.len() == 1 && self.loops[0].is_null() {
            n.num_darts() == 0
        } else {
            n.validate(&self.loops, &self.k).is_ok()
        };
        report.check(valid, || format!("{tag}: image does not validate against {:?}", self.loops));
        let code = n.canonical_code();
        report.check(self.codes.contains_key(&code), || format!("{tag}: image outside the target class"));
        *self.image.entry(code).or_insert(0) += 1;
    }
}

/// Runs the process on every map of `NPM(ℓ, K)` and checks the bijections,
/// the injections with their bad complements, and the weight relations.
/// The pivot is position 0 of `l`.
pub fn verify_pps(l: &Loop, k: &PlaquetteAssignment, en: &Enumerator) -> Result<PpsReport, EnumError> {
    let w = &en.weights;
    let mut report = PpsReport::default();
    let e = l.edges()[0];
    let mut neg_def: BTreeMap<Plaquette, Target> = BTreeMap::new();
    let mut pos_def: BTreeMap<Plaquette, Target> = BTreeMap::new();
    for (positive, target, table) in [(false, e.reverse(), &mut neg_def), (true, e, &mut pos_def)] {
        for p in plaquettes_containing(&target) {
            if k.get(&p) > 0 {
                let t = Target::new(vec![deformed_loop(l, &p, positive)], k.remove(&p).expect("present"), en)?;
                table.insert(p, t);
            }
        }
    }
    let mut neg_split: BTreeMap<usize, Target> = BTreeMap::new();
    for s in l.negative_splittings(0).expect("pivot") {
        neg_split.insert(s.partner, Target::new(vec![s.parts.0, s.parts.1], k.clone(), en)?);
    }
    let mut pos_split: BTreeMap<usize, Target> = BTreeMap::new();
    for s in l.positive_splittings(0).expect("pivot") {
        pos_split.insert(s.partner, Target::new(vec![s.parts.0, s.parts.1], k.clone(), en)?);
    }

    let npm = en.enumerate_class(std::slice::from_ref(l), k, MapClass::Npm)?.maps;
    report.maps = npm.len();
    let mut lhs = BigInt::zero();
    for m in &npm {
        let wm = m.weight_with(w);
        lhs += &wm;
        let step = match pps_step(m) {
            Ok(s) => s,
            Err(err) => {
                report.check(false, || format!("process failed: {err}"));
                continue;
            }
        };
        match step {
            PpsOutcome::NegativeDeformation { plaquette, map } => {
                report.check(map.weight_with(w) == wm && map.area() + 1 == m.area(), || {
                    "negative deformation: weight or area relation fails".into()
                });
                match neg_def.get_mut(&plaquette) {
                    Some(t) => t.hit(&map, &mut report, "negative deformation"),
                    None => report.check(false, || format!("negative deformation by absent {plaquette:?}")),
                }
            }
            PpsOutcome::NegativeSplitting { partner, map } => {
                report.check(map.weight_with(w) == wm && map.area() == m.area(), || {
                    "negative splitting: weight or area relation fails".into()
                });
                match neg_split.get_mut(&partner) {
                    Some(t) => t.hit(&map, &mut report, "negative splitting"),
                    None => report.check(false, || format!("negative splitting at unknown partner {partner}")),
                }
            }
            PpsOutcome::Pinched(steps) => {
                let mut sum = BigInt::zero();
                for st in &steps {
                    let wk = st.pinched.weight_with(w);
                    sum += &wk;
                    match &st.result {
                        PinchedResult::PositiveDeformation { plaquette, map } => {
                            report.check(map.weight_with(w) == wk && map.area() + 1 == m.area(), || {
                                "positive deformation: weight or area relation fails".into()
                            });
                            match pos_def.get_mut(plaquette) {
                                Some(t) => t.hit(map, &mut report, "positive deformation"),
                                None => report.check(false, || format!("positive deformation by absent {plaquette:?}")),
                            }
                        }
                        PinchedResult::PositiveSplitting { partner, map } => {
                            report.check(map.weight_with(w) == wk && map.area() == m.area(), || {
                                "positive splitting: weight or area relation fails".into()
                            });
                            match pos_split.get_mut(partner) {
                                Some(t) => t.hit(map, &mut report, "positive splitting"),
                                None => report.check(false, || format!("positive splitting at unknown partner {partner}")),
                            }
                        }
                    }
                }
                report.check(wm == -sum, || "pinching: w(M) differs from minus the pinched sum".into());
            }
        }
    }

    let mut rhs = BigInt::zero();
    for (sign, table, kind) in [(1, &neg_split, "negative"), (-1, &pos_split, "positive")] {
        for (j, t) in table {
            let onto = t.image.len() == t.codes.len() && t.image.values().all(|&c| c == 1);
            report.check(onto, || format!("{kind} splitting at {j} is not a bijection"));
            let s: BigInt = t.codes.values().map(|n| n.weight_with(w)).sum();
            rhs += s * sign;
        }
    }
    for (positive, table) in [(false, &neg_def), (true, &pos_def)] {
        for (p, t) in table {
            let kind = if positive { "positive" } else { "negative" };
            report.check(t.image.values().all(|&c| c == 1), || format!("{kind} deformation by {p:?} not injective"));
            let mut bad_sum = BigInt::zero();
            let mut image_sum = BigInt::zero();
            for (code, n) in &t.codes {
                let arc_bad = if positive { is_positive_bad(n, e) } else { is_negative_bad(n, e) };
                let inv = if positive { positive_inverse(n) } else { Some(negative_inverse(n, e)) };
                let inv_bad = match inv {
                    None => true,
                    Some(mm) => {
                        !(is_disk_product(&mm, 1) && mm.is_non_separable() && mm.validate(std::slice::from_ref(l), k).is_ok())
                    }
                };
                let in_image = t.image.contains_key(code);
                report.check(arc_bad == inv_bad, || format!("{kind} deformation by {p:?}: arc and inverse criteria differ"));
                report.check(in_image != arc_bad, || format!("{kind} deformation by {p:?}: image is not the complement of the bad set"));
                if arc_bad {
                    bad_sum += n.weight_with(w);
                } else {
                    image_sum += n.weight_with(w);
                }
            }
            if positive {
                report.positive_bad_sum += bad_sum;
                rhs -= image_sum;
            } else {
                report.negative_bad_sum += bad_sum;
                rhs += image_sum;
            }
        }
    }
    report.check(lhs == rhs, || format!("structure identity: surface sum {lhs} vs decomposed {rhs}"));
    Ok(report)
}
