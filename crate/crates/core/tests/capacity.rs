use proptest::prelude::*;
use std::f64::consts::PI;
use symcap::capacity::{minimize_capacity, DiscretePath, SolverConfig};
use symcap::linalg::rotation2;
use symcap::{ConvexBody, SymplecticMap, Vector};

fn v2(x: f64, y: f64) -> Vector {
    Vector::from_vec(vec![x, y])
}

/// Triangle-fan area of a star-shaped vertex list sorted by angle.
fn fan_area(pts: &[Vector]) -> f64 {
    let m = pts.len();
    (0..m).map(|i| 0.5 * (pts[i][0] * pts[(i + 1) % m][1] - pts[(i + 1) % m][0] * pts[i][1])).sum()
}

fn fast(seed: u64) -> SolverConfig {
    SolverConfig { carrier: false, ..SolverConfig::fast(seed) }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn regular_polygon_capacity_is_area(m in 4usize..9, r in 0.6..1.5f64, phase in 0.0..1.0f64) {
        let pts: Vec<Vector> = (0..m)
            .map(|k| {
                let t = phase + k as f64 * 2.0 * PI / m as f64;
                v2(r * t.cos(), r * t.sin())
            })
            .collect();
        let body = ConvexBody::polytope(&pts).unwrap();
        let c = minimize_capacity(&body, &SymplecticMap::identity(1), &fast(1)).unwrap().value;
        let area = fan_area(&pts);
        prop_assert!((c - area).abs() < 0.02 * area, "{c} vs {area}");
    }

    #[test]
    fn capacity_scales_quadratically(a in 0.6..1.4f64, b in 0.6..1.4f64, s in 0.5..2.0f64) {
        let body = ConvexBody::ellipsoid_axes(&[a, b]).unwrap();
        let psi = SymplecticMap::identity(1);
        let c1 = minimize_capacity(&body, &psi, &fast(2)).unwrap().value;
        let c2 = minimize_capacity(&body.scaled(s).unwrap(), &psi, &fast(2)).unwrap().value;
        prop_assert!((c2 - s * s * c1).abs() < 0.02 * c2);
    }

    #[test]
    fn twisted_disk_is_half_t(theta in 0.3..PI) {
        let psi = SymplecticMap::from_a(&rotation2(theta)).unwrap();
        let t = psi.t_psi().unwrap().value;
        let c = minimize_capacity(&ConvexBody::unit_ball(4), &psi, &fast(3)).unwrap().value;
        prop_assert!((2.0 * c - t).abs() < 0.02 * t, "{c} vs {t}");
    }
}

#[test]
fn circle_action_is_enclosed_area() {
    let path = DiscretePath::circle(512, 1.5, SymplecticMap::identity(1)).unwrap();
    let exact = PI * 1.5 * 1.5;
    // inscribed 512-gon
    let polygon = 0.5 * 512.0 * 1.5 * 1.5 * (2.0 * PI / 512.0).sin();
    assert!((path.action() - polygon).abs() < 1e-9 * exact, "{} vs {polygon}", path.action());
}

#[test]
fn same_seed_same_bits() {
    let body = ConvexBody::cube(2, 1.0).unwrap();
    let psi = SymplecticMap::identity(1);
    let a = minimize_capacity(&body, &psi, &fast(9)).unwrap();
    let b = minimize_capacity(&body, &psi, &fast(9)).unwrap();
    assert_eq!(a.value.to_bits(), b.value.to_bits());
    assert_eq!(a.restart_values.len(), b.restart_values.len());
}

#[test]
fn ellipse_capacity_is_pi_ab() {
    let body = ConvexBody::ellipsoid_axes(&[0.7, 1.3]).unwrap();
    let c = minimize_capacity(&body, &SymplecticMap::identity(1), &fast(4)).unwrap().value;
    let exact = PI * 0.7 * 1.3;
    assert!((c - exact).abs() < 0.02 * exact);
}

#[test]
fn product_of_squares_is_smaller_square() {
    // [-1,1]^2 x [-r,r]^2 in the (q1,p1) and (q2,p2) planes has capacity min(4, 4 r^2)
    let r = 0.7;
    let body = ConvexBody::boxed(&[-1.0, -r, -1.0, -r], &[1.0, r, 1.0, r]).unwrap();
    // two competing planes: the fast restart budget can settle in the larger one
    let cfg = SolverConfig { nodes: 128, carrier: false, seed: 5, ..SolverConfig::default() };
    let c = minimize_capacity(&body, &SymplecticMap::identity(2), &cfg).unwrap().value;
    let exact = 4.0 * r * r;
    assert!((c - exact).abs() < 0.02 * exact, "{c} vs {exact}");
}
