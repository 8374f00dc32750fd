use proptest::prelude::*;
use std::f64::consts::{PI, TAU};
use symcap::billiard::{adl_action, find_a_billiard, flow, lift_to_phase, mirror, reflect, SearchConfig};
use symcap::{ConvexBody, Matrix, Vector};

fn v2(x: f64, y: f64) -> Vector {
    Vector::from_vec(vec![x, y])
}

fn unit(t: f64) -> Vector {
    v2(t.cos(), t.sin())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn mirror_is_isometric_involution(a in 0.0..TAU, b in 0.0..TAU, s in 0.1..5.0f64) {
        let v = unit(a) * s;
        let n = unit(b);
        let w = mirror(&v, &n);
        prop_assert!((w.norm() - v.norm()).abs() < 1e-12);
        prop_assert!((mirror(&w, &n) - &v).norm() < 1e-12);
        prop_assert!((w.dot(&n) + v.dot(&n)).abs() < 1e-12);
    }

    #[test]
    fn reflection_turns_outgoing_inward(a in 0.0..TAU, b in -1.4..1.4f64) {
        let n = unit(a);
        let v = unit(a + b);
        let w = reflect(&v, &n).unwrap();
        prop_assert!(w.dot(&n) < 0.0);
        prop_assert!((w.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn disk_flight_keeps_chord_length(alpha in -1.4..1.4f64, k in 1usize..6) {
        // leaving the boundary point (1,0) at angle alpha to the inward normal
        let q0 = v2(1.0, 0.0);
        let v0 = unit(PI + alpha);
        let f = flow(&ConvexBody::unit_ball(2), &q0, &v0, k).unwrap();
        let chord = 2.0 * alpha.cos();
        for w in f.points.windows(2) {
            prop_assert!(((&w[1] - &w[0]).norm() - chord).abs() < 1e-7);
        }
        for p in &f.points[1..] {
            prop_assert!((p.norm() - 1.0).abs() < 1e-7);
        }
    }
}

#[test]
fn disk_diameter_orbit_and_lift() {
    let disk = ConvexBody::unit_ball(2);
    let cfg = SearchConfig { restarts: 12, seed: 11, ..SearchConfig::default() };
    let out = find_a_billiard(&disk, &Matrix::identity(2, 2), &cfg).unwrap();
    let s = out.shortest().unwrap();
    assert!((s.length - 4.0).abs() < 0.04, "{}", s.length);
    let ph = lift_to_phase(s, &disk, 1.0).unwrap();
    assert!((ph.action - s.length).abs() < 1e-6);
    let adl = adl_action(&s.closed_points(), &ConvexBody::unit_ball(2));
    assert!((ph.action - adl).abs() < 1e-9);
}

#[test]
fn antipodal_twist_in_disk_is_long_enough() {
    let disk = ConvexBody::unit_ball(2);
    let out = find_a_billiard(&disk, &(-Matrix::identity(2, 2)), &SearchConfig { restarts: 12, seed: 5, ..SearchConfig::default() }).unwrap();
    for l in out.accepted_lengths() {
        assert!(l >= PI / 2.0 - 1e-6, "{l}");
    }
}

#[test]
fn search_is_deterministic() {
    let sq = ConvexBody::cube(2, 1.0).unwrap();
    let cfg = SearchConfig { bounce_counts: vec![1, 2], restarts: 8, seed: 3, ..SearchConfig::default() };
    let a = find_a_billiard(&sq, &Matrix::identity(2, 2), &cfg).unwrap().accepted_lengths();
    let b = find_a_billiard(&sq, &Matrix::identity(2, 2), &cfg).unwrap().accepted_lengths();
    assert_eq!(a, b);
}
