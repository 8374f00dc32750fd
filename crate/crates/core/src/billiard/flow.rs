//! Straight flights between boundary hits and the mirror law.

use crate::error::{Error, Result};
use crate::geometry::{ConvexBody, Shape};
use crate::optim::bisect;
use crate::Vector;

/// Relative gauge tolerance for "on the boundary".
pub const BOUNDARY_TOL: f64 = 1e-7;
/// Smallest normal component accepted at a reflection.
pub const GRAZING_TOL: f64 = 1e-9;

/// Gauge of `x` about the reference point of `body`.
pub fn gauge_at(body: &ConvexBody, x: &Vector) -> f64 {
    let c = body.reference_point();
    body.gauge_about(&c, &(x - &c))
}

pub fn on_boundary(body: &ConvexBody, x: &Vector) -> bool {
    (gauge_at(body, x) - 1.0).abs() <= BOUNDARY_TOL
}

/// Radial projection of `x` onto the body about its reference point.
pub fn clamp_into(body: &ConvexBody, x: &Vector) -> Vector {
    let g = gauge_at(body, x);
    if g <= 1.0 {
        return x.clone();
    }
    let c = body.reference_point();
    &c + (x - &c) / g
}

#[derive(Debug, Clone)]
pub struct RayHit {
    pub point: Vector,
    pub distance: f64,
    /// Averaged unit outward normal.
    pub normal: Vector,
    /// Unit generators of the normal cone.
    pub cone: Vec<Vector>,
}

/// Largest `t` with `q + t v` in the body, `None` when the ray is degenerate.
fn exit_parameter(body: &ConvexBody, q: &Vector, v: &Vector) -> Option<f64> {
    let scale = body.circumradius_bound().max(1e-300);
    match body.shape() {
        Shape::Ball { center, radius } => {
            let d = q - center;
            quadratic_exit(v.norm_squared(), d.dot(v), d.norm_squared() - radius * radius)
        }
        Shape::Ellipsoid { center, q: m, .. } => {
            let d = q - center;
            let mv = m * v;
            quadratic_exit(v.dot(&mv), d.dot(&mv), d.dot(&(m * &d)) - 1.0)
        }
        Shape::Polytope(p) => {
            let vn = v.norm();
            p.facets
                .iter()
                .filter(|f| f.normal.dot(v) > 1e-14 * vn)
                .map(|f| (f.offset - f.normal.dot(q)) / f.normal.dot(v))
                .min_by(f64::total_cmp)
        }
        Shape::Translate { body, by } => exit_parameter(body, &(q - by), v),
        Shape::Linear { body, inverse, .. } => exit_parameter(body, &(inverse * q), &(inverse * v)),
        _ => {
            let f = |t: f64| gauge_at(body, &(q + v * t)) - 1.0;
            let f0 = f(0.0);
            if f0 > BOUNDARY_TOL {
                return None;
            }
            let span = 4.0 * scale / v.norm();
            let lo = if f0 < -BOUNDARY_TOL {
                0.0
            } else {
                let delta = 1e-6 * span;
                if f(delta) >= 0.0 {
                    return None;
                }
                delta
            };
            Some(bisect(f, lo, span, 1e-15 * span).0)
        }
    }
    .filter(|&t| t.is_finite())
}

/// Largest root of `a t^2 + 2 b t + c`.
fn quadratic_exit(a: f64, b: f64, c: f64) -> Option<f64> {
    let disc = b * b - a * c;
    if disc < 0.0 || a <= 0.0 {
        return None;
    }
    let s = disc.sqrt();
    // stable form of (-b + s) / a
    Some(if b <= 0.0 { (s - b) / a } else { -c / (b + s) })
}

/// First boundary point along `q + t v`, `t > 0`.
pub fn ray_exit(body: &ConvexBody, q: &Vector, v: &Vector) -> Result<RayHit> {
    if q.len() != body.dim() || v.len() != body.dim() {
        return Err(Error::DimensionMismatch { expected: body.dim(), found: q.len().max(v.len()) });
    }
    if v.amax() == 0.0 {
        return Err(Error::ZeroDirection);
    }
    let g = gauge_at(body, q);
    if g > 1.0 + BOUNDARY_TOL {
        return Err(Error::HypothesisViolated("ray starts outside the body".into()));
    }
    let scale = body.circumradius_bound().max(1e-300);
    let t = exit_parameter(body, q, v).ok_or(Error::DegenerateRay)?;
    let distance = t * v.norm();
    if distance <= 1e-9 * scale {
        return Err(Error::DegenerateRay);
    }
    let point = q + v * t;
    let cone = body.normal_cone(&point);
    let normal = body.normal(&point);
    Ok(RayHit { point, distance, normal, cone })
}

/// Mirror law `v - 2 <v, n> n` for an outgoing `v`.
pub fn reflect(v: &Vector, normal: &Vector) -> Result<Vector> {
    let n = normal.normalize();
    let c = v.dot(&n);
    if c <= GRAZING_TOL * v.norm() {
        return Err(Error::TangentialImpact { normal_component: c });
    }
    Ok(v - n * (2.0 * c))
}

/// Mirror image across the tangent plane with normal `n`, defined for any `v`.
pub fn mirror(v: &Vector, normal: &Vector) -> Vector {
    let n = normal.normalize();
    v - &n * (2.0 * v.dot(&n))
}

/// Free flight with `k` reflections.
#[derive(Debug, Clone)]
pub struct Flight {
    /// `q_0` followed by the `k` bounce points.
    pub points: Vec<Vector>,
    /// Unit directions of the `k + 1` flights; the last one leaves the final bounce.
    pub velocities: Vec<Vector>,
    pub normals: Vec<Vector>,
}

impl Flight {
    pub fn bounce_length(&self) -> f64 {
        self.points.windows(2).map(|w| (&w[1] - &w[0]).norm()).sum()
    }

    pub fn last_point(&self) -> &Vector {
        self.points.last().expect("flight has a start point")
    }

    pub fn exit_velocity(&self) -> &Vector {
        self.velocities.last().expect("flight has a velocity")
    }

    /// Points of the trajectory that continues for `s` after the last bounce.
    pub fn extended(&self, s: f64) -> Vec<Vector> {
        let mut pts = self.points.clone();
        if s > 0.0 {
            pts.push(self.last_point() + self.exit_velocity() * s);
        }
        pts
    }
}

/// Flight from `q0` in direction `v0` through `k` reflections. Corner hits of
/// polytopes count as tangential.
pub fn flow(body: &ConvexBody, q0: &Vector, v0: &Vector, k: usize) -> Result<Flight> {
    let mut q = q0.clone();
    let mut v = v0.normalize();
    let mut points = vec![q.clone()];
    let mut velocities = vec![v.clone()];
    let mut normals = Vec::with_capacity(k);
    for _ in 0..k {
        let hit = ray_exit(body, &q, &v)?;
        if hit.cone.len() > 1 {
            return Err(Error::TangentialImpact { normal_component: 0.0 });
        }
        v = reflect(&v, &hit.normal)?;
        q = hit.point;
        points.push(q.clone());
        velocities.push(v.clone());
        normals.push(hit.normal);
    }
    Ok(Flight { points, velocities, normals })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &[f64]) -> Vector {
        Vector::from_vec(x.to_vec())
    }

    #[test]
    fn exits() {
        let disk = ConvexBody::unit_ball(2);
        let hit = ray_exit(&disk, &v(&[0.0, 0.0]), &v(&[1.0, 0.0])).unwrap();
        assert!((hit.point - v(&[1.0, 0.0])).norm() < 1e-14);
        let square = ConvexBody::cube(2, 1.0).unwrap();
        let hit = ray_exit(&square, &v(&[0.0, 0.0]), &v(&[1.0, 1.0]).normalize()).unwrap();
        assert!((hit.point - v(&[1.0, 1.0])).norm() < 1e-12);
        assert_eq!(hit.cone.len(), 2);
        let ell = ConvexBody::ellipsoid_axes(&[2.0, 1.0]).unwrap();
        let hit = ray_exit(&ell, &v(&[0.0, 0.0]), &v(&[1.0, 0.0])).unwrap();
        assert!((hit.point - v(&[2.0, 0.0])).norm() < 1e-12);
    }

    #[test]
    fn boundary_start() {
        let disk = ConvexBody::unit_ball(2);
        let hit = ray_exit(&disk, &v(&[-1.0, 0.0]), &v(&[1.0, 0.0])).unwrap();
        assert!((hit.point - v(&[1.0, 0.0])).norm() < 1e-12);
        assert_eq!(ray_exit(&disk, &v(&[-1.0, 0.0]), &v(&[-1.0, 0.0])).unwrap_err(), Error::DegenerateRay);
        assert_eq!(ray_exit(&disk, &v(&[-1.0, 0.0]), &v(&[0.0, 1.0])).unwrap_err(), Error::DegenerateRay);
    }

    #[test]
    fn generic_exit_matches_closed_form() {
        let disk = ConvexBody::unit_ball(2);
        let sum = ConvexBody::psum(disk.clone(), disk.clone(), 2.0).unwrap();
        let hit = ray_exit(&sum, &v(&[0.1, 0.0]), &v(&[0.0, 1.0])).unwrap();
        let r = 2f64.sqrt();
        assert!((hit.point[1] - (r * r - 0.01f64).sqrt()).abs() < 1e-6, "{:?}", hit.point);
    }
}
