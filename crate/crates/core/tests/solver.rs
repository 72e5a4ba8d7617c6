mod common;

use common::{arb_loop, lp, plaquette0};
use latticeloop::assignments::{enumerate_balanced_assignments, PlaquetteAssignment};
use latticeloop::enumerator::{Enumerator, MapClass};
use latticeloop::lattice::Vertex;
use latticeloop::loops::Loop;
use latticeloop::solver::*;
use latticeloop::suites::{all_separable_instance, window_instances};
use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

fn tmp(name: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("latticeloop-solver-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn plaquette_series_low_orders() {
    let s = Solver::new(2);
    let l = Loop::from_plaquette(&plaquette0());
    let series = s.phi_series(&l, 3);
    assert_eq!(series.coeff(1), BigInt::from(1));
    assert_eq!(series.coeff(2), BigInt::from(0));
    assert_eq!(series.coeff(3), BigInt::from(0));
    let moved = Loop::from_plaquette(&plaquette0().translate(&Vertex::new(&[3, -2])));
    assert_eq!(Solver::new(2).phi_series(&moved, 3), series);
}

#[test]
fn evaluation() {
    let s = Solver::new(2);
    let l = Loop::from_plaquette(&plaquette0());
    match s.phi_eval(&l, &Beta::Float(0.1), 3).value {
        Beta::Float(v) => assert!((v - 0.1).abs() < 1e-12),
        other => panic!("{other:?}"),
    }
    match s.phi_eval(&l, &Beta::Float(0.0), 3).value {
        Beta::Float(v) => assert_eq!(v, 0.0),
        other => panic!("{other:?}"),
    }
    let third = BigRational::new(BigInt::from(1), BigInt::from(3));
    let r = s.phi_eval(&l, &Beta::Exact(third.clone()), 3);
    assert_eq!(r.value, Beta::Exact(third));
    assert_eq!(r.last_area, 3);
    assert_eq!(r.last_term, 0.0);
    assert!(!r.caveat.is_empty());
}

#[test]
fn pure_backtrack_is_one() {
    let s = Solver::new(2);
    assert_eq!(s.phi_k(&lp("+1 -1"), &PlaquetteAssignment::new()), BigInt::from(1));
    assert_eq!(s.phi_k(&lp("+1 +2 -2 -1"), &PlaquetteAssignment::new()), BigInt::from(1));
}

#[test]
fn cache_round_trips() {
    let s = Solver::new(2);
    let empty = tmp("empty.jsonl");
    s.cache_save(&empty).unwrap();
    assert_eq!(Solver::new(2).cache_load(&empty).unwrap(), 0);

    let l = Loop::from_plaquette(&plaquette0());
    s.phi_series(&l, 3);
    assert!(s.memo_len() > 0);
    let a = tmp("a.jsonl");
    s.cache_save(&a).unwrap();
    let t = Solver::new(2);
    assert_eq!(t.cache_load(&a).unwrap(), s.memo_len());
    let b = tmp("b.jsonl");
    t.cache_save(&b).unwrap();
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    // loading twice is harmless
    t.cache_load(&a).unwrap();
    assert_eq!(t.phi_series(&l, 3), s.phi_series(&l, 3));
}

#[test]
fn cache_errors() {
    let s = Solver::new(3);
    let p = tmp("d3.jsonl");
    s.cache_save(&p).unwrap();
    assert!(matches!(Solver::new(2).cache_load(&p), Err(CacheError::Dimension { found: 3, expected: 2 })));

    let t = Solver::new(2);
    t.phi_series(&Loop::from_plaquette(&plaquette0()), 2);
    let good = tmp("good.jsonl");
    t.cache_save(&good).unwrap();
    let text = std::fs::read_to_string(&good).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    let v: serde_json::Value = serde_json::from_str(&lines[1]).unwrap();
    let flipped = format!("{}", v["coeff"].as_str().unwrap().parse::<BigInt>().unwrap() + 7);
    lines[1] = serde_json::json!({"key": v["key"], "coeff": flipped}).to_string();
    let bad = tmp("bad.jsonl");
    std::fs::write(&bad, lines.join("\n") + "\n").unwrap();
    assert!(matches!(t.cache_load(&bad), Err(CacheError::Conflict { .. })));

    let schema = tmp("schema.jsonl");
    std::fs::write(&schema, "{\"schema\":\"other\",\"dim\":2}\n").unwrap();
    assert!(matches!(t.cache_load(&schema), Err(CacheError::Schema(_))));
    let garbage = tmp("garbage.jsonl");
    std::fs::write(&garbage, "not json\n").unwrap();
    assert!(matches!(t.cache_load(&garbage), Err(CacheError::Format { line: 1, .. })));
}

#[test]
fn pivot_choice_does_not_matter() {
    let s = Solver::new(2);
    for x in window_instances(2, 6, 3) {
        if x.l.has_backtrack() {
            continue;
        }
        let want = s.phi_k(&x.l, &x.k);
        for i in 0..x.l.len() {
            assert_eq!(s.phi_k_at(&x.l, &x.k, i), want, "{}", x.describe());
        }
    }
}

#[test]
fn thread_count_does_not_change_results() {
    let l = Loop::from_plaquette(&plaquette0());
    let run = |threads| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| Solver::new(2).phi_series(&l, 4))
    };
    assert_eq!(run(1), run(4));
}

#[test]
fn loop_equation_small_cases() {
    let en = Enumerator::default();
    let p = plaquette0();
    let l = Loop::from_plaquette(&p);
    let k = PlaquetteAssignment::from_counts(&[(p.inverse(), 1)]);
    for i in 0..4 {
        let r = verify_mle(&l, &k, i, &en).unwrap();
        assert!(r.holds(), "{i}: {r:?}");
        assert_eq!(r.lhs, BigInt::from(1));
    }
    let x = all_separable_instance();
    for i in 0..x.l.len() {
        let r = verify_mle(&x.l, &x.k, i, &en).unwrap();
        assert_eq!(r, MleReport { lhs: BigInt::from(0), rhs: BigInt::from(0) });
    }
}

#[test]
fn solver_agrees_with_enumeration_on_window() {
    let s = Solver::new(2);
    let en = Enumerator::default();
    for x in window_instances(2, 6, 2) {
        let want = en.surface_sum(&x.l, &x.k, MapClass::Npm).unwrap();
        assert_eq!(s.phi_k(&x.l, &x.k), want, "{}", x.describe());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn solver_matches_enumeration_on_random_loops(l in arb_loop(2, 6)) {
        let r = l.erase_backtracks();
        prop_assume!(!r.is_null());
        let s = Solver::new(2);
        let en = Enumerator::default();
        for k in enumerate_balanced_assignments(&r, 2) {
            prop_assert_eq!(s.phi_k(&r, &k), en.surface_sum(&r, &k, MapClass::Npm).unwrap());
        }
    }
}
