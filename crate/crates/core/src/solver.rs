//! Memoized master loop equation solver.
//!
//! `phi_k` returns the integer `c` with `φ^K(ℓ) = c β^{area(K)}`. The
//! recursion at a pivot edge 𝐞 reads
//!
//! ```text
//! c(ℓ,K) = Σ_{S−} Σ_{K1+K2=K} c(ℓ1,K1) c(ℓ2,K2) − Σ_{S+} Σ_{K1+K2=K} c(ℓ1,K1) c(ℓ2,K2)
//!        + Σ_{p ∈ P(e⁻¹), K(p)>0} c(ℓ ⊖ p, K∖p) − Σ_{q ∈ P(e), K(q)>0} c(ℓ ⊕ q, K∖q)
//! ```

use crate::assignments::{enumerate_balanced_assignments, PlaquetteAssignment};
use crate::enumerator::{EnumError, Enumerator, OracleCache};
use crate::lattice::plaquettes_containing;
use crate::loops::{is_balanced, Loop, Mode};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use parking_lot::RwLock;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};
use std::io::{BufRead, Write};
use std::path::Path;
use thiserror::Error;

pub const CACHE_SCHEMA: &str = "latticeloop/cache/v1";

#[derive(Debug, Error)]
pub enum CacheError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed cache line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("cache schema '{0}' is not {CACHE_SCHEMA}")]
    Schema(String),
    #[error("cache dimension {found} does not match {expected}")]
    Dimension { found: usize, expected: usize },
    #[error("conflicting values for key {key}: {a} vs {b}")]
    Conflict { key: String, a: String, b: String },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BetaSeries {
    pub a_max: usize,
    pub coefficients: BTreeMap<usize, BigInt>,
}

impl BetaSeries {
    pub fn coeff(&self, area: usize) -> BigInt {
        self.coefficients.get(&area).cloned().unwrap_or_default()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Beta {
    Exact(BigRational),
    Float(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalReport {
    pub value: Beta,
    pub last_area: usize,
    /// `|c_A β^A|` at the last included area.
    pub last_term: f64,
    pub caveat: &'static str,
}

pub const TRUNCATION_CAVEAT: &str =
    "series truncated at a_max; the radius of convergence is not known explicitly, the last term is only a heuristic";

/// Memo table plus the dimension it belongs to.
pub struct Solver {
    dim: usize,
    memo: RwLock<HashMap<String, BigInt>>,
}

#[derive(Serialize, Deserialize)]
struct CacheHeader {
    schema: String,
    dim: usize,
}

#[derive(Serialize, Deserialize)]
struct CacheLine {
    key: String,
    coeff: String,
}

fn memo_key(l: &Loop, k: &PlaquetteAssignment) -> (String, usize) {
    let c = l.canonical();
    let off = c.offset.expect("non-null loop");
    (format!("{}|{}", c.key(), k.translate(&off).key()), c.rotation)
}

impl Solver {
    pub fn new(dim: usize) -> Self {
        Solver { dim, memo: RwLock::new(HashMap::new()) }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn memo_len(&self) -> usize {
        self.memo.read().len()
    }

    /// `φ^K(ℓ) / β^{area(K)}`.
    pub fn phi_k(&self, l: &Loop, k: &PlaquetteAssignment) -> BigInt {
        self.phi_inner(l, k, None)
    }

    /// As [`Self::phi_k`] but applying the first recursion step at `position`
    /// of the backtrack-free loop `l`.
    pub fn phi_k_at(&self, l: &Loop, k: &PlaquetteAssignment, position: usize) -> BigInt {
        assert!(!l.has_backtrack(), "pivot override needs a backtrack-free loop");
        self.phi_inner(l, k, Some(position))
    }

    fn phi_inner(&self, l: &Loop, k: &PlaquetteAssignment, pivot: Option<usize>) -> BigInt {
        let r = l.erase_backtracks();
        if r.is_null() {
            return if k.is_empty() { BigInt::one() } else { BigInt::zero() };
        }
        if k.is_empty() || !is_balanced(std::slice::from_ref(&r), k) || !k.is_ell_connected(&r) {
            return BigInt::zero();
        }
        if let Some(at) = pivot {
            return self.recurse(&r, at, k);
        }
        let (key, rotation) = memo_key(&r, k);
        if let Some(v) = self.memo.read().get(&key) {
            return v.clone();
        }
        let v = self.recurse(&r, rotation, k);
        self.memo.write().entry(key).or_insert_with(|| v.clone());
        v
    }

    fn recurse(&self, l: &Loop, at: usize, k: &PlaquetteAssignment) -> BigInt {
        let e = l.edges()[at];
        let measure = (k.area(), l.len());
        let mut total = BigInt::zero();
        for s in l.negative_splittings(at).expect("valid position") {
            total += self.pair(&s.parts.0, &s.parts.1, k, measure);
        }
        for s in l.positive_splittings(at).expect("valid position") {
            total -= self.pair(&s.parts.0, &s.parts.1, k, measure);
        }
        for (mode, target) in [(Mode::Negative, e.reverse()), (Mode::Positive, e)] {
            for p in plaquettes_containing(&target) {
                if k.get(&p) == 0 {
                    continue;
                }
                let pl = Loop::from_plaquette(&p);
                let j = p.position_of(&target).expect("plaquette contains edge");
                let m = Loop::merge(l, at, &pl, j, mode).expect("matching edges");
                let rest = k.remove(&p).expect("present");
                debug_assert!((rest.area(), m.len()) < measure);
                let v = self.phi_k(&m, &rest);
                match mode {
                    Mode::Negative => total += v,
                    Mode::Positive => total -= v,
                }
            }
        }
        total
    }

    fn pair(&self, a: &Loop, b: &Loop, k: &PlaquetteAssignment, measure: (usize, usize)) -> BigInt {
        let mut total = BigInt::zero();
        for (k1, k2) in k.decompositions() {
            debug_assert!((k1.area(), a.len()) < measure && (k2.area(), b.len()) < measure);
            if !is_balanced(std::slice::from_ref(a), &k1) || !is_balanced(std::slice::from_ref(b), &k2) {
                continue;
            }
            let x = self.phi_k(a, &k1);
            if x.is_zero() {
                continue;
            }
            total += x * self.phi_k(b, &k2);
        }
        total
    }

    /// Convolution over ordered decompositions `K1 + … + Kn = K`.
    pub fn phi_k_string(&self, s: &[Loop], k: &PlaquetteAssignment) -> BigInt {
        match s {
            [] => {
                if k.is_empty() {
                    BigInt::one()
                } else {
                    BigInt::zero()
                }
            }
            [l] => self.phi_k(l, k),
            [l, rest @ ..] => {
                let mut total = BigInt::zero();
                for (k1, k2) in k.decompositions() {
                    if !is_balanced(std::slice::from_ref(l), &k1) || !is_balanced(rest, &k2) {
                        continue;
                    }
                    let x = self.phi_k(l, &k1);
                    if !x.is_zero() {
                        total += x * self.phi_k_string(rest, &k2);
                    }
                }
                total
            }
        }
    }

    /// Coefficients `c_A` for `1 ≤ A ≤ a_max`.
    pub fn phi_series(&self, l: &Loop, a_max: usize) -> BetaSeries {
        let r = l.erase_backtracks();
        assert!(!r.is_null() && a_max >= 1);
        let ks = enumerate_balanced_assignments(&r, a_max);
        let values: Vec<(usize, BigInt)> = ks.par_iter().map(|k| (k.area(), self.phi_k(&r, k))).collect();
        let mut coefficients: BTreeMap<usize, BigInt> = (1..=a_max).map(|a| (a, BigInt::zero())).collect();
        for (a, v) in values {
            *coefficients.get_mut(&a).expect("area in range") += v;
        }
        BetaSeries { a_max, coefficients }
    }

    pub fn phi_eval(&self, l: &Loop, beta: &Beta, a_max: usize) -> EvalReport {
        let series = self.phi_series(l, a_max);
        eval_series(&series, beta)
    }

    /// Writes the memo table, sorted by key.
    pub fn cache_save(&self, path: &Path) -> Result<(), CacheError> {
        let memo = self.memo.read();
        let mut entries: Vec<(&String, &BigInt)> = memo.iter().collect();
        entries.sort();
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        let header = CacheHeader { schema: CACHE_SCHEMA.into(), dim: self.dim };
        writeln!(w, "{}", serde_json::to_string(&header).expect("serializable"))?;
        for (key, v) in entries {
            let line = CacheLine { key: key.clone(), coeff: v.to_string() };
            writeln!(w, "{}", serde_json::to_string(&line).expect("serializable"))?;
        }
        w.flush()?;
        Ok(())
    }

    /// Merges a cache file into the memo table.
    pub fn cache_load(&self, path: &Path) -> Result<usize, CacheError> {
        let (dim, entries) = read_cache(path)?;
        if dim != self.dim {
            return Err(CacheError::Dimension { found: dim, expected: self.dim });
        }
        let mut memo = self.memo.write();
        let n = entries.len();
        for (key, v) in entries {
            if let Some(old) = memo.get(&key) {
                if *old != v {
                    return Err(CacheError::Conflict { key, a: old.to_string(), b: v.to_string() });
                }
            }
            memo.insert(key, v);
        }
        Ok(n)
    }

    pub fn clear(&self) {
        self.memo.write().clear();
    }
}

/// Reads a cache file into (dimension, entries in file order).
pub fn read_cache(path: &Path) -> Result<(usize, Vec<(String, BigInt)>), CacheError> {
    let f = std::io::BufReader::new(std::fs::File::open(path)?);
    let mut lines = f.lines();
    let header = lines.next().ok_or(CacheError::Format { line: 1, message: "empty file".into() })??;
    let h: CacheHeader =
        serde_json::from_str(&header).map_err(|e| CacheError::Format { line: 1, message: e.to_string() })?;
    if h.schema != CACHE_SCHEMA {
        return Err(CacheError::Schema(h.schema));
    }
    let mut out = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fmt_err = |m: String| CacheError::Format { line: i + 2, message: m };
        let c: CacheLine = serde_json::from_str(&line).map_err(|e| fmt_err(e.to_string()))?;
        let v: BigInt = c.coeff.parse().map_err(|_| fmt_err(format!("bad integer '{}'", c.coeff)))?;
        out.push((c.key, v));
    }
    Ok((h.dim, out))
}

/// `Σ c_A β^A` with a truncation report.
pub fn eval_series(series: &BetaSeries, beta: &Beta) -> EvalReport {
    let last_area = series.a_max;
    match beta {
        Beta::Exact(b) => {
            let mut total = BigRational::zero();
            let mut last = BigRational::zero();
            for (a, c) in &series.coefficients {
                let term = BigRational::from_integer(c.clone()) * num_traits::pow(b.clone(), *a);
                if *a == last_area {
                    last = term.abs();
                }
                total += term;
            }
            EvalReport {
                value: Beta::Exact(total),
                last_area,
                last_term: last.to_f64().unwrap_or(f64::NAN),
                caveat: TRUNCATION_CAVEAT,
            }
        }
        Beta::Float(b) => {
            let mut total = 0.0;
            let mut last = 0.0;
            for (a, c) in &series.coefficients {
                let term = c.to_f64().unwrap_or(f64::NAN) * b.powi(*a as i32);
                if *a == last_area {
                    last = term.abs();
                }
                total += term;
            }
            EvalReport { value: Beta::Float(total), last_area, last_term: last, caveat: TRUNCATION_CAVEAT }
        }
    }
}

/// Both sides of the master loop equation at `position`, each evaluated by
/// enumeration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MleReport {
    pub lhs: BigInt,
    pub rhs: BigInt,
}

impl MleReport {
    pub fn holds(&self) -> bool {
        self.lhs == self.rhs
    }
}

pub fn verify_mle(l: &Loop, k: &PlaquetteAssignment, position: usize, en: &Enumerator) -> Result<MleReport, EnumError> {
    let mut oracle = OracleCache::new(en);
    let lhs = oracle.npm(l, k)?;
    let e = l.edges()[position];
    let mut rhs = BigInt::zero();
    for s in l.negative_splittings(position).expect("position in range") {
        rhs += oracle.npm_pair(&s.parts.0, &s.parts.1, k)?;
    }
    for s in l.positive_splittings(position).expect("position in range") {
        rhs -= oracle.npm_pair(&s.parts.0, &s.parts.1, k)?;
    }
    for (mode, target) in [(Mode::Negative, e.reverse()), (Mode::Positive, e)] {
        for p in plaquettes_containing(&target) {
            if k.get(&p) == 0 {
                continue;
            }
            let j = p.position_of(&target).expect("plaquette contains edge");
            let m = Loop::merge(l, position, &Loop::from_plaquette(&p), j, mode).expect("matching edges");
            let v = oracle.npm(&m, &k.remove(&p).expect("present"))?;
            match mode {
                Mode::Negative => rhs += v,
                Mode::Positive => rhs -= v,
            }
        }
    }
    Ok(MleReport { lhs, rhs })
}
