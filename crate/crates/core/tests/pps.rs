mod common;

use common::plaquette0;
use latticeloop::assignments::PlaquetteAssignment;
use latticeloop::enumerator::{Enumerator, MapClass};
use latticeloop::lattice::plaquettes_containing;
use latticeloop::loops::Loop;
use latticeloop::pps::*;
use latticeloop::suites::{all_separable_instance, window_instances};

fn npm(l: &Loop, k: &PlaquetteAssignment) -> Vec<latticeloop::maps::EmbeddedMap> {
    Enumerator::default().enumerate_class(std::slice::from_ref(l), k, MapClass::Npm).unwrap().maps
}

#[test]
fn peeling_the_single_plaquette_disk() {
    let p = plaquette0();
    let l = Loop::from_plaquette(&p);
    let k = PlaquetteAssignment::from_counts(&[(p.inverse(), 1)]);
    let m = npm(&l, &k).remove(0);
    let e = l.edges()[0];
    match pps_step(&m).unwrap() {
        PpsOutcome::NegativeDeformation { plaquette, map } => {
            assert_eq!(plaquette, p.inverse());
            let target = deformed_loop(&l, &plaquette, false);
            assert_eq!(target.len(), 6);
            assert!(target.erase_backtracks().is_null());
            map.validate(&[target], &PlaquetteAssignment::new()).unwrap();
            assert_eq!(negative_inverse(&map, e).canonical_code(), m.canonical_code());
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn splitting_off_a_backtrack() {
    let l = common::lp("+1 -1");
    let m = npm(&l, &PlaquetteAssignment::new()).remove(0);
    match pps_step(&m).unwrap() {
        PpsOutcome::NegativeSplitting { partner, map } => {
            assert_eq!(partner, 1);
            assert_eq!(map.num_darts(), 0);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn larger_blue_face_is_pinched() {
    // a root face of half-degree 2 offers one pinching
    let x = window_instances(2, 8, 3)
        .into_iter()
        .flat_map(|x| npm(&x.l, &x.k).into_iter().map(move |m| (x.clone(), m)))
        .find_map(|(x, m)| match pps_step(&m).unwrap() {
            PpsOutcome::Pinched(steps) => Some((x, m, steps)),
            _ => None,
        });
    let (x, m, steps) = x.expect("some root face larger than a 2-gon");
    assert!(!steps.is_empty());
    for s in steps {
        assert_eq!(s.pinched.faces().list.len(), m.faces().list.len() + 1, "{}", x.describe());
        match s.result {
            PinchedResult::PositiveDeformation { map, .. } => assert!(positive_inverse(&map).is_some()),
            PinchedResult::PositiveSplitting { map, .. } => assert_eq!(map.boundaries().len(), 2),
        }
    }
}

#[test]
fn process_checks_pass_on_small_window() {
    let en = Enumerator::default();
    for x in window_instances(2, 6, 2) {
        let r = verify_pps(&x.l, &x.k, &en).unwrap();
        assert!(r.failures.is_empty(), "{}: {:?}", x.describe(), r.failures);
        assert_eq!(r.negative_bad_sum, r.positive_bad_sum, "{}", x.describe());
    }
}

#[test]
fn separable_only_instance_makes_every_deformation_bad() {
    let en = Enumerator::default();
    let x = all_separable_instance();
    let mut seen = 0;
    for r in 0..x.l.len() {
        let l = x.l.rotated(r);
        let e = l.edges()[0];
        for (positive, target) in [(false, e.reverse()), (true, e)] {
            for p in plaquettes_containing(&target) {
                if x.k.get(&p) == 0 {
                    continue;
                }
                let class = npm(&deformed_loop(&l, &p, positive), &x.k.remove(&p).unwrap());
                let bad = bad_set(&l, &x.k, &p, positive, &en).unwrap();
                assert_eq!(bad.len(), class.len());
                seen += class.len();
            }
        }
    }
    assert!(seen > 0);
}
