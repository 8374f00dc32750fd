//! Seeded random bodies and twists for the suites.

use crate::geometry::ConvexBody;
use crate::linalg::{gaussian_matrix, rotation2};
use crate::{Matrix, Vector};
use rand::Rng;
use std::f64::consts::PI;

/// Convex polygon with `4..=8` vertices at radii in `[0.6, 1.4]`, shifted by
/// at most 0.2; contains the origin.
pub fn random_polygon<R: Rng>(rng: &mut R) -> ConvexBody {
    loop {
        let m = rng.gen_range(4..=8);
        let shift = Vector::from_vec(vec![rng.gen_range(-0.2..0.2), rng.gen_range(-0.2..0.2)]);
        let mut angles: Vec<f64> = (0..m).map(|_| rng.gen_range(0.0..2.0 * PI)).collect();
        angles.sort_by(f64::total_cmp);
        let pts: Vec<Vector> = angles
            .iter()
            .map(|&t| {
                let r = rng.gen_range(0.6..1.4);
                Vector::from_vec(vec![r * t.cos(), r * t.sin()]) + &shift
            })
            .collect();
        if let Ok(body) = ConvexBody::polytope(&pts) {
            if body.origin_interior() && body.depth_at(&Vector::zeros(2)) > 0.2 {
                return body;
            }
        }
    }
}

/// Semi-axes and rotation of a random ellipse.
pub fn random_axes<R: Rng>(rng: &mut R) -> (f64, f64, f64) {
    (rng.gen_range(0.6..1.5), rng.gen_range(0.6..1.5), rng.gen_range(0.0..PI))
}

/// Ellipse `R(theta) diag(a, b)` applied to the unit disk.
pub fn ellipse(a: f64, b: f64, theta: f64, center: &Vector) -> ConvexBody {
    let r = rotation2(theta);
    let q = &r * Matrix::from_diagonal(&Vector::from_vec(vec![1.0 / (a * a), 1.0 / (b * b)])) * r.transpose();
    ConvexBody::ellipsoid(q, center.clone()).expect("positive definite")
}

pub fn random_ellipse<R: Rng>(rng: &mut R) -> ConvexBody {
    let (a, b, t) = random_axes(rng);
    let c = Vector::from_vec(vec![rng.gen_range(-0.2..0.2), rng.gen_range(-0.2..0.2)]);
    ellipse(a, b, t, &c)
}

/// Polygon or ellipse with equal probability.
pub fn random_planar_body<R: Rng>(rng: &mut R) -> ConvexBody {
    if rng.gen_bool(0.5) {
        random_polygon(rng)
    } else {
        random_ellipse(rng)
    }
}

/// `I + 0.5 G` with `G` Gaussian, redrawn until well conditioned.
pub fn random_gl<R: Rng>(n: usize, rng: &mut R) -> Matrix {
    loop {
        let a = Matrix::identity(n, n) + gaussian_matrix(n, n, rng) * 0.5;
        let s = a.clone().singular_values();
        if s.min() > 0.2 {
            return a;
        }
    }
}

/// `L B^dim` with `L` from [`random_gl`], centred at the origin.
pub fn random_ellipsoid<R: Rng>(dim: usize, rng: &mut R) -> ConvexBody {
    ConvexBody::unit_ball(dim).linear(&random_gl(dim, rng)).expect("invertible")
}
