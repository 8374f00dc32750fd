//! A-billiard trajectories given by their bounce sequence and the residual
//! of the twisted boundary conditions.

use super::flow::{gauge_at, mirror, on_boundary};
use crate::geometry::ConvexBody;
use crate::linalg::to_rows;
use crate::{Matrix, Vector};
use serde::Serialize;

/// Which velocity condition at the endpoints was used.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EndClause {
    /// `A v+(0) = v-(T)`.
    Interior,
    /// `A v-(0) = v-(T)` with the mirrored start velocity.
    MirroredStart,
    /// `A v+(0) = v+(T)` with the mirrored end velocity.
    MirroredEnd,
    /// `A v-(0) = v+(T)`.
    MirroredBoth,
}

#[derive(Debug, Clone, Serialize)]
pub struct Residuals {
    /// `|sigma(T) - A sigma(0)|`.
    pub position: f64,
    /// Smallest mismatch among the applicable endpoint clauses.
    pub velocity: f64,
    /// Largest violation of the boundary and mirror conditions at the bounces.
    pub bounce: f64,
    pub clause: EndClause,
    pub total: f64,
}

#[derive(Debug, Clone)]
pub struct BilliardTrajectory {
    /// `q_0, q_1, ..., q_m`; `q_1..q_{m-1}` are the bounces.
    pub points: Vec<Vector>,
    /// Unit directions of the `m` segments.
    pub velocities: Vec<Vector>,
    /// Bounce times for unit speed.
    pub times: Vec<f64>,
    pub speed: f64,
    pub length: f64,
    pub a: Matrix,
    pub residuals: Residuals,
    pub start_on_boundary: bool,
    pub end_on_boundary: bool,
    pub accepted: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct TrajectoryRecord {
    pub points: Vec<Vec<f64>>,
    pub velocities: Vec<Vec<f64>>,
    pub times: Vec<f64>,
    pub speed: f64,
    pub length: f64,
    pub a: Vec<Vec<f64>>,
    pub residuals: Residuals,
    pub start_on_boundary: bool,
    pub end_on_boundary: bool,
    pub accepted: bool,
}

fn rows(v: &[Vector]) -> Vec<Vec<f64>> {
    v.iter().map(|x| x.iter().copied().collect()).collect()
}

impl BilliardTrajectory {
    /// Builds the trajectory through `points` and evaluates its residuals.
    /// Consecutive points must differ.
    pub fn from_points(body: &ConvexBody, a: &Matrix, points: Vec<Vector>) -> Self {
        let velocities: Vec<Vector> = points.windows(2).map(|w| (&w[1] - &w[0]).normalize()).collect();
        let mut times = Vec::new();
        let mut length = 0.0;
        for w in points.windows(2) {
            length += (&w[1] - &w[0]).norm();
            times.push(length);
        }
        times.pop();
        let residuals = a_billiard_residual(body, a, &points);
        let diam = body.diameter().value;
        let shortest = points.windows(2).map(|w| (&w[1] - &w[0]).norm()).fold(f64::INFINITY, f64::min);
        let accepted = points.len() >= 3 && residuals.total < super::ACCEPT_TOL * diam && shortest >= super::MIN_SEGMENT * diam;
        Self {
            start_on_boundary: on_boundary(body, &points[0]),
            end_on_boundary: on_boundary(body, points.last().expect("nonempty")),
            points,
            velocities,
            times,
            speed: 1.0,
            length,
            a: a.clone(),
            residuals,
            accepted,
        }
    }

    pub fn bounces(&self) -> &[Vector] {
        &self.points[1..self.points.len() - 1]
    }

    /// Sequence `q_0, ..., q_m` followed by `A q_0`.
    pub fn closed_points(&self) -> Vec<Vector> {
        let mut pts = self.points.clone();
        pts.pop();
        pts.push(&self.a * &self.points[0]);
        pts
    }

    pub fn to_record(&self) -> TrajectoryRecord {
        TrajectoryRecord {
            points: rows(&self.points),
            velocities: rows(&self.velocities),
            times: self.times.clone(),
            speed: self.speed,
            length: self.length,
            a: to_rows(&self.a),
            residuals: self.residuals.clone(),
            start_on_boundary: self.start_on_boundary,
            end_on_boundary: self.end_on_boundary,
            accepted: self.accepted,
        }
    }
}

/// Residual of the A-billiard conditions for the polygonal path through
/// `points`: endpoint position, the best applicable endpoint velocity
/// clause and the bounce conditions at interior points.
pub fn a_billiard_residual(body: &ConvexBody, a: &Matrix, points: &[Vector]) -> Residuals {
    let m = points.len();
    let bad = Residuals { position: f64::INFINITY, velocity: f64::INFINITY, bounce: f64::INFINITY, clause: EndClause::Interior, total: f64::INFINITY };
    if m < 3 || points.windows(2).any(|w| (&w[1] - &w[0]).norm() == 0.0) {
        return bad;
    }
    let q0 = &points[0];
    let qm = &points[m - 1];
    let position = (qm - a * q0).norm();
    let v_start = (&points[1] - q0).normalize();
    let v_end = (qm - &points[m - 2]).normalize();
    let start_b = on_boundary(body, q0);
    let end_b = on_boundary(body, qm);
    let av = a * &v_start;
    let mut options = vec![(EndClause::Interior, (&av - &v_end).norm())];
    let start_mirror = start_b.then(|| a * mirror(&v_start, &body.normal(q0)));
    let end_mirror = end_b.then(|| mirror(&v_end, &body.normal(qm)));
    if let Some(s) = &start_mirror {
        options.push((EndClause::MirroredStart, (s - &v_end).norm()));
    }
    if let Some(e) = &end_mirror {
        options.push((EndClause::MirroredEnd, (&av - e).norm()));
    }
    if let (Some(s), Some(e)) = (&start_mirror, &end_mirror) {
        options.push((EndClause::MirroredBoth, (s - e).norm()));
    }
    let (clause, velocity) = options.into_iter().fold((EndClause::Interior, f64::INFINITY), |best, o| if o.1 < best.1 { o } else { best });
    let mut bounce: f64 = 0.0;
    for i in 1..m - 1 {
        let q = &points[i];
        bounce = bounce.max((gauge_at(body, q) - 1.0).abs() * body.circumradius_bound());
        let vin = (q - &points[i - 1]).normalize();
        let vout = (&points[i + 1] - q).normalize();
        let n = body.normal(q);
        let expected = mirror(&vin, &n);
        let outgoing = vin.dot(&n);
        bounce = bounce.max((vout - expected).norm());
        if outgoing <= 0.0 {
            bounce = bounce.max(1.0 - outgoing);
        }
    }
    Residuals { position, velocity, bounce, clause, total: position + velocity + bounce }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &[f64]) -> Vector {
        Vector::from_vec(x.to_vec())
    }

    #[test]
    fn diameter_orbit_is_closed() {
        let disk = ConvexBody::unit_ball(2);
        let pts = vec![v(&[0.3, 0.0]), v(&[1.0, 0.0]), v(&[-1.0, 0.0]), v(&[0.3, 0.0])];
        let t = BilliardTrajectory::from_points(&disk, &Matrix::identity(2, 2), pts);
        assert!(t.residuals.total < 1e-12);
        assert!((t.length - 4.0).abs() < 1e-12);
        assert!(t.accepted);
    }

    #[test]
    fn half_diameter_under_rotation() {
        let disk = ConvexBody::unit_ball(2);
        let a = -Matrix::identity(2, 2);
        let pts = vec![v(&[0.5, 0.0]), v(&[1.0, 0.0]), v(&[-0.5, 0.0])];
        let t = BilliardTrajectory::from_points(&disk, &a, pts);
        assert!(t.residuals.total < 1e-12, "{:?}", t.residuals);
        assert_eq!(t.residuals.clause, EndClause::Interior);
    }

    #[test]
    fn random_polyline_fails() {
        let disk = ConvexBody::unit_ball(2);
        let pts = vec![v(&[0.1, 0.2]), v(&[0.6, 0.8]), v(&[-0.3, 0.1])];
        let t = BilliardTrajectory::from_points(&disk, &Matrix::identity(2, 2), pts);
        assert!(t.residuals.total > 0.1);
        assert!(!t.accepted);
    }
}
