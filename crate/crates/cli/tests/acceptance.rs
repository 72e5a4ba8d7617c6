//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

use latticeloop::assignments::{enumerate_balanced_assignments, PlaquetteAssignment};
use latticeloop::enumerator::{Enumerator, MapClass};
use latticeloop::lattice::{Plaquette, Vertex};
use latticeloop::loops::Loop;
use latticeloop::solver::Solver;
use latticeloop::suites::{self, Instance, SuiteReport};
use latticeloop::weights::Weights;
use num_bigint::BigInt;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

const SEED: u64 = 20240917;

/// Wall-clock allowance for growing the plaquette series, in seconds.
fn series_allowance() -> Duration {
    let secs = std::env::var("LATTICELOOP_SERIES_SECONDS").ok().and_then(|s| s.parse().ok()).unwrap_or(120);
    Duration::from_secs(secs)
}

struct Outcome {
    ok: bool,
    detail: String,
}

fn outcome(ok: bool, detail: impl Into<String>) -> Outcome {
    Outcome { ok, detail: detail.into() }
}

fn suite_line(r: &SuiteReport) -> String {
    let first = r.failures.first().map(|f| format!("; first failure: {f}")).unwrap_or_default();
    format!("{} instances {} checks {} failures {}{}", r.suite, r.instances, r.checks, r.failures.len(), first)
}

fn plaquette() -> Plaquette {
    Plaquette::new(Vertex::origin(2), 0, 1, 1)
}

fn area_three(l: &Loop) -> Vec<PlaquetteAssignment> {
    enumerate_balanced_assignments(l, 3).into_iter().filter(|k| k.area() == 3).collect()
}

struct Corpus {
    window: Vec<Instance>,
    random: Vec<Instance>,
    small: Vec<Instance>,
}

impl Corpus {
    fn new() -> Self {
        let window = suites::window_instances(2, 8, 3);
        let random = suites::random_instances(3, 6, 2, 120, SEED);
        let mut small: Vec<Instance> =
            window.iter().filter(|x| x.l.len() <= 6 && x.k.area() <= 2).cloned().collect();
        small.extend(random.iter().cloned());
        small.push(suites::all_separable_instance());
        Corpus { window, random, small }
    }
}

fn c1() -> Outcome {
    let t = Instant::now();
    let r = suites::check_weights(&Weights::standard());
    let fast = t.elapsed() < Duration::from_secs(1);
    outcome(r.passed() && fast, format!("{} in {:?}", suite_line(&r), t.elapsed()))
}

fn c2(en: &Enumerator) -> Outcome {
    let t = Instant::now();
    let l = Loop::from_plaquette(&plaquette());
    let ks = area_three(&l);
    let mut sums: Vec<BigInt> = ks.iter().map(|k| en.surface_sum(&l, k, MapClass::Pm).unwrap()).collect();
    sums.sort();
    let want: Vec<BigInt> = [-4, -1, -1, -1, -1].into_iter().map(BigInt::from).collect();
    let total: BigInt = sums.iter().sum();
    let ok = ks.len() == 5 && sums == want && total == BigInt::from(-8) && t.elapsed() < Duration::from_secs(60);
    let shown: Vec<String> = sums.iter().map(|x| x.to_string()).collect();
    outcome(ok, format!("{} assignments, PM sums [{}], total {total}, {:?}", ks.len(), shown.join(", "), t.elapsed()))
}

fn npm_area_three_total(en: &Enumerator) -> BigInt {
    let l = Loop::from_plaquette(&plaquette());
    area_three(&l).iter().map(|k| en.surface_sum(&l, k, MapClass::Npm).unwrap()).sum()
}

fn c3(en: &Enumerator) -> Outcome {
    let total = npm_area_three_total(en);
    let l = Loop::from_plaquette(&plaquette());
    let solver = Solver::new(2);
    let allowance = series_allowance();
    let start = Instant::now();
    let mut reached = 0;
    let mut exact = true;
    let mut last = Duration::ZERO;
    for a in 1.. {
        // the cost of one more area has grown about fifteenfold per step
        if a > 4 && start.elapsed() + last * 15 > allowance {
            break;
        }
        let t = Instant::now();
        let s = solver.phi_series(&l, a);
        last = t.elapsed();
        exact &= s.coefficients.iter().all(|(&area, c)| *c == BigInt::from((area == 1) as i32));
        reached = a;
        if !exact {
            break;
        }
    }
    let ok = total == BigInt::from(0) && exact && reached >= 4;
    outcome(ok, format!("NPM total {total}; series 1·β then zeros up to a_max {reached} in {:?}", start.elapsed()))
}

fn c4(en: &Enumerator) -> Outcome {
    let t = Instant::now();
    let x = suites::all_separable_instance();
    let e = en.enumerate_class(std::slice::from_ref(&x.l), &x.k, MapClass::Npm).unwrap();
    let pm = en.enumerate_class(std::slice::from_ref(&x.l), &x.k, MapClass::Pm).unwrap();
    let phi = Solver::new(2).phi_k(&x.l, &x.k);
    let ok = e.maps.is_empty() && phi == BigInt::from(0) && !pm.maps.is_empty() && t.elapsed() < Duration::from_secs(60);
    outcome(ok, format!("NPM maps {}, PM maps {} (all separable), phi_K {phi}", e.maps.len(), pm.maps.len()))
}

fn c5(c: &Corpus, en: &Enumerator) -> Outcome {
    let t = Instant::now();
    let a = suites::check_oracle(&c.window, &Solver::new(2), en).unwrap();
    let b = suites::check_oracle(&c.random, &Solver::new(3), en).unwrap();
    let ok = a.passed() && b.passed() && c.random.len() >= 100 && t.elapsed() < Duration::from_secs(1800);
    outcome(ok, format!("d=2 window: {}; d=3 random: {}; {:?}", suite_line(&a), suite_line(&b), t.elapsed()))
}

fn solver_for(xs: &[Instance]) -> (Vec<Instance>, Vec<Instance>) {
    xs.iter().cloned().partition(|x| x.l.dim() == Some(2))
}

fn c6(c: &Corpus, en: &Enumerator) -> Outcome {
    let (d2, d3) = solver_for(&c.small);
    let a = suites::check_mle(&d2, &Solver::new(2), en).unwrap();
    let b = suites::check_mle(&d3, &Solver::new(3), en).unwrap();
    let empty = a.stats.get("empty_lhs").copied().unwrap_or(0);
    // the same check on the rest of the window corpus, up to length 8 and area 3
    let wide = suites::check_mle(&c.window, &Solver::new(2), en).unwrap();
    let ok = a.passed() && b.passed() && wide.passed() && empty > 0;
    outcome(ok, format!("{}; d=3 {}; extended to the full window corpus: {}", suite_line(&a), suite_line(&b), suite_line(&wide)))
}

fn c7(c: &Corpus, en: &Enumerator) -> Outcome {
    let (_, d3) = solver_for(&c.small);
    let a = suites::check_backtrack(&c.window, 200, 2, SEED, &Solver::new(2), en).unwrap();
    let b = suites::check_backtrack(&d3, 50, 2, SEED + 1, &Solver::new(3), en).unwrap();
    let ok = a.passed() && b.passed() && a.instances >= 200;
    outcome(ok, format!("d=2 {}; d=3 {}", suite_line(&a), suite_line(&b)))
}

fn c8(c: &Corpus, en: &Enumerator) -> Outcome {
    let mut xs = c.window.clone();
    let inv = suites::invalid_pinching_instance();
    if !xs.contains(&inv) {
        xs.push(inv.clone());
    }
    let r = suites::check_pinching(&xs, en).unwrap();
    let (excluded, n) = suites::invalid_exclusion_sum(&inv, en).unwrap();
    let ok = r.passed() && excluded != BigInt::from(0);
    outcome(
        ok,
        format!(
            "{}; stats {:?}; dropping faces with invalid pinchings removes {n} maps of total weight {excluded}",
            suite_line(&r),
            r.stats
        ),
    )
}

fn c9(c: &Corpus, en: &Enumerator) -> Outcome {
    let r = suites::check_pps(&c.small, en).unwrap();
    let wide = suites::check_pps(&c.window, en).unwrap();
    let maps = |r: &SuiteReport| r.stats.get("maps").copied().unwrap_or(0);
    outcome(
        r.passed() && wide.passed(),
        format!("{}; maps processed {}; extended to the full window corpus: {}, maps {}", suite_line(&r), maps(&r), suite_line(&wide), maps(&wide)),
    )
}

fn c10(c: &Corpus, en: &Enumerator) -> Outcome {
    let r = suites::check_cancellation(&c.small, en).unwrap();
    let wide = suites::check_cancellation(&c.window, en).unwrap();
    let nonzero = |r: &SuiteReport| r.stats.get("nonzero_bad_sums").copied().unwrap_or(0);
    outcome(
        r.passed() && wide.passed(),
        format!(
            "{}; non-zero bad sums {}; extended to the full window corpus: {}, non-zero bad sums {}",
            suite_line(&r),
            nonzero(&r),
            suite_line(&wide),
            nonzero(&wide)
        ),
    )
}

fn c11(c: &Corpus, en: &Enumerator) -> Outcome {
    let mut xs = c.window.clone();
    xs.extend(c.random.iter().cloned());
    let r = suites::check_rigidity(&xs, en).unwrap();
    outcome(r.passed(), suite_line(&r))
}

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_latticeloop")
}

fn run(args: &[&str]) -> (i32, Vec<u8>) {
    let out = Command::new(bin()).args(args).env_remove("LATTICELOOP_CACHE").output().expect("binary runs");
    (out.status.code().unwrap_or(-1), out.stdout)
}

fn scratch() -> PathBuf {
    let dir = std::env::temp_dir().join(format!("latticeloop-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).expect("temp dir");
    dir
}

fn path_str(p: &Path) -> &str {
    p.to_str().expect("utf-8 path")
}

fn c12(c: &Corpus) -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;
    let dir = scratch();

    // byte determinism across runs and thread counts
    let series = ["series", "--loop", "+2 +1 +1 -2 -1 -1", "--amax", "4", "--beta", "1/7"];
    let verify = ["verify", "--suite", "oracle", "--max-area", "2"];
    let dump1 = dir.join("maps1.jsonl");
    let dump4 = dir.join("maps4.jsonl");
    let k = dir.join("k.json");
    let p = plaquette();
    std::fs::write(&k, PlaquetteAssignment::from_counts(&[(p, 1), (p.inverse(), 2)]).to_json()).unwrap();
    for (name, args) in [("series", &series[..]), ("verify", &verify[..])] {
        let runs: Vec<(i32, Vec<u8>)> = ["1", "4", "4"]
            .iter()
            .map(|j| run(&[&["--jobs", j][..], args].concat()))
            .collect();
        let same = runs.iter().all(|r| r == &runs[0]) && runs[0].0 == 0;
        ok &= same;
        notes.push(format!("{name} identical across jobs 1/4/4: {same}"));
    }
    for (j, d) in [("1", &dump1), ("4", &dump4)] {
        run(&["--jobs", j, "enumerate", "--loop", "+2 +1 -2 -1", "--assignment", path_str(&k), "--dump", path_str(d)]);
    }
    let same = std::fs::read(&dump1).ok() == std::fs::read(&dump4).ok();
    ok &= same;
    notes.push(format!("map dumps identical: {same}"));

    // cache round trip
    let a = dir.join("a.jsonl");
    let b = dir.join("b.jsonl");
    let _ = std::fs::remove_file(&a);
    let first = run(&["--cache", path_str(&a), "series", "--loop", "+2 +1 -2 -1", "--amax", "4"]);
    let before = std::fs::read(&a).unwrap_or_default();
    let second = run(&["--cache", path_str(&a), "series", "--loop", "+2 +1 -2 -1", "--amax", "4"]);
    let after = std::fs::read(&a).unwrap_or_default();
    let s = Solver::new(2);
    s.cache_load(&a).unwrap();
    s.cache_save(&b).unwrap();
    let reloaded = std::fs::read(&b).unwrap_or_default();
    let round = !before.is_empty() && before == after && before == reloaded && first == second;
    ok &= round;
    notes.push(format!("cache round trip bit-identical: {round}"));

    // mutation: w2 flipped
    let bad = Enumerator::default().with_weights(Weights::with_flipped_w2());
    let m1 = !suites::check_weights(&bad.weights).passed();
    let m3 = npm_area_three_total(&bad) != BigInt::from(0);
    let m5 = !suites::check_oracle(&c.window, &Solver::new(2), &bad).unwrap().passed();
    let cli = run(&["verify", "--suite", "oracle", "--inject-weight-bug"]).0 == 4;
    let caught = m1 && m3 && m5 && cli;
    ok &= caught;
    notes.push(format!("flipped w2 fails criteria 1/3/5: {m1}/{m3}/{m5}, cli exit 4: {cli}"));

    let _ = std::fs::remove_dir_all(&dir);
    outcome(ok, notes.join("; "))
}

fn main() {
    let en = Enumerator::default();
    let corpus = Corpus::new();
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("weight table and Catalan recursion", Box::new(c1)),
        ("area-3 assignments of a plaquette, PM sums", Box::new(|| c2(&en))),
        ("non-separable correction and plaquette series", Box::new(|| c3(&en))),
        ("all-separable instance is empty", Box::new(|| c4(&en))),
        ("solver equals enumeration", Box::new(|| c5(&corpus, &en))),
        ("loop equation by enumeration at every edge", Box::new(|| c6(&corpus, &en))),
        ("backtrack cancellation", Box::new(|| c7(&corpus, &en))),
        ("pinching identities", Box::new(|| c8(&corpus, &en))),
        ("process structure", Box::new(|| c9(&corpus, &en))),
        ("bad-set cancellation", Box::new(|| c10(&corpus, &en))),
        ("rooted rigidity", Box::new(|| c11(&corpus, &en))),
        ("determinism and persistence", Box::new(|| c12(&corpus))),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let o = f();
        let status = if o.ok { "PASS" } else { "FAIL" };
        failed += (!o.ok) as usize;
        println!("criterion {:>2} {status}: {name} [{:.1?}] {}", i + 1, t.elapsed(), o.detail);
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
