use proptest::prelude::*;
use symcap::{ConvexBody, Vector};

fn v2(x: f64, y: f64) -> Vector {
    Vector::from_vec(vec![x, y])
}

fn polygon_points() -> impl Strategy<Value = Vec<Vector>> {
    prop::collection::vec((0.0..std::f64::consts::TAU, 0.5..1.5f64), 5..10)
        .prop_map(|pts| pts.into_iter().map(|(t, r)| v2(r * t.cos(), r * t.sin())).collect())
}

fn direction() -> impl Strategy<Value = Vector> {
    (0.0..std::f64::consts::TAU).prop_map(|t| v2(t.cos(), t.sin()))
}

fn max_dot(points: &[Vector], w: &Vector) -> f64 {
    points.iter().map(|p| p.dot(w)).fold(f64::NEG_INFINITY, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn polytope_support_is_max_over_points(pts in polygon_points(), w in direction()) {
        let Ok(body) = ConvexBody::polytope(&pts) else { return Ok(()) };
        prop_assert!((body.support_value(&w) - max_dot(&pts, &w)).abs() < 1e-9);
    }

    #[test]
    fn translation_shifts_support(pts in polygon_points(), w in direction(), tx in -0.3..0.3f64, ty in -0.3..0.3f64) {
        let Ok(body) = ConvexBody::polytope(&pts) else { return Ok(()) };
        let t = v2(tx, ty);
        let h = body.support_value(&w);
        let moved = body.translate(&t).unwrap();
        prop_assert!((moved.support_value(&w) - h - w.dot(&t)).abs() < 1e-9);
    }

    #[test]
    fn psum_support_is_p_mean(w in direction(), a in 0.5..2.0f64, b in 0.5..2.0f64, p in 1.0..4.0f64) {
        let d = ConvexBody::ellipsoid_axes(&[a, b]).unwrap();
        let k = ConvexBody::unit_ball(2);
        let hd = d.support_value(&w);
        let s = ConvexBody::psum(d, k, p).unwrap();
        let expected = (hd.powf(p) + 1.0).powf(1.0 / p);
        prop_assert!((s.support_value(&w) - expected).abs() < 1e-6 * expected);
    }

    #[test]
    fn ball_gauge_is_scaled_norm(x in -2.0..2.0f64, y in -2.0..2.0f64, r in 0.3..3.0f64) {
        let z = v2(x, y);
        prop_assume!(z.norm() > 1e-6);
        let ball = ConvexBody::ball(Vector::zeros(2), r).unwrap();
        prop_assert!((ball.gauge(&z).unwrap() - z.norm() / r).abs() < 1e-10);
    }

    #[test]
    fn gauge_and_support_are_dual(pts in polygon_points(), z in direction()) {
        let Ok(body) = ConvexBody::polytope(&pts) else { return Ok(()) };
        prop_assume!(body.origin_interior());
        // boundary point z / j(z) maximises <., w> for some w, so <z, w> <= j(z) h(w)
        let j = body.gauge(&z).unwrap();
        for k in 0..16 {
            let t = k as f64 * std::f64::consts::TAU / 16.0;
            let w = v2(t.cos(), t.sin());
            prop_assert!(z.dot(&w) <= j * body.support_value(&w) + 1e-9);
        }
    }

    #[test]
    fn polar_of_polar_is_identity(pts in polygon_points(), w in direction()) {
        let Ok(body) = ConvexBody::polytope(&pts) else { return Ok(()) };
        prop_assume!(body.origin_interior() && body.depth_at(&Vector::zeros(2)) > 0.1);
        let h = body.support_value(&w);
        let back = body.polar().unwrap().polar().unwrap();
        prop_assert!((back.support_value(&w) - h).abs() < 1e-7);
    }
}

#[test]
fn box_area_is_product_of_sides() {
    let b = ConvexBody::boxed(&[-1.0, -0.5], &[2.0, 0.25]).unwrap();
    let area = b.as_polytope().unwrap().area_2d().unwrap();
    assert!((area - 3.0 * 0.75).abs() < 1e-12);
}

#[test]
fn square_measures() {
    let sq = ConvexBody::cube(2, 1.0).unwrap();
    assert!((sq.width().value - 2.0).abs() < 1e-6);
    assert!((sq.diameter().value - 8f64.sqrt()).abs() < 1e-6);
    assert!((sq.inradius().0 - 1.0).abs() < 1e-6);
}
