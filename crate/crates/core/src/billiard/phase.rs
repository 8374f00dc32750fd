//! Lifts of billiard trajectories to characteristics on `∂(Delta x Lambda)`.

use super::flow::{gauge_at, mirror, on_boundary};
use super::trajectory::{BilliardTrajectory, EndClause};
use crate::capacity::DiscretePath;
use crate::error::{Error, Result};
use crate::geometry::ConvexBody;
use crate::linalg::project_onto_cone;
use crate::symplectic::SymplecticMap;
use crate::{Matrix, Vector};
use serde::Serialize;

const LIFT_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ArcKind {
    /// `q` moves, `p` fixed on `∂Lambda`.
    Alpha,
    /// `q` fixed on `∂Delta`, `p` moves along a chord of `Lambda`.
    Beta,
    /// Both factors on the boundary.
    Glide,
}

#[derive(Debug, Clone)]
pub struct PhaseArc {
    pub kind: ArcKind,
    /// Samples `(q, p)` along the arc, endpoints included.
    pub samples: Vec<Vector>,
}

impl PhaseArc {
    pub fn start(&self) -> &Vector {
        &self.samples[0]
    }

    pub fn end(&self) -> &Vector {
        self.samples.last().expect("arc has samples")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PhaseClass {
    Proper,
    Gliding,
    Mixed,
}

#[derive(Debug, Clone)]
pub struct PhaseTrajectory {
    pub arcs: Vec<PhaseArc>,
    pub a: Matrix,
    pub action: f64,
    /// Indices of arc junctions lying on `∂Delta x ∂Lambda`.
    pub corner_junctions: Vec<usize>,
}

fn join(q: &Vector, p: &Vector) -> Vector {
    Vector::from_iterator(q.len() + p.len(), q.iter().chain(p.iter()).copied())
}

fn split(z: &Vector) -> (Vector, Vector) {
    let n = z.len() / 2;
    (z.rows(0, n).into_owned(), z.rows(n, n).into_owned())
}

fn linear_arc(kind: ArcKind, from: Vector, to: Vector) -> PhaseArc {
    PhaseArc { kind, samples: vec![from, to] }
}

impl PhaseTrajectory {
    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    /// Nodes of the chain of samples, closing node excluded.
    fn chain(&self) -> Vec<Vector> {
        let mut nodes = Vec::new();
        for arc in &self.arcs {
            let k = arc.samples.len();
            nodes.extend(arc.samples[..k - 1].iter().cloned());
        }
        nodes
    }

    /// `|gamma(T) - Psi_A gamma(0)|`.
    pub fn closure_residual(&self) -> f64 {
        let psi = SymplecticMap::from_a(&self.a).expect("invertible twist");
        let first = self.arcs[0].start();
        let last = self.arcs.last().expect("arcs").end();
        (last - psi.apply(first)).norm()
    }

    /// Checks that each piece moves inside the cone spanned by
    /// `-(∇j_Lambda(p), 0)` and `(0, ∇j_Delta(q))` and stays on `∂(Delta x Lambda)`.
    pub fn check_cone(&self, delta: &ConvexBody, lambda: &ConvexBody) -> Result<()> {
        let n = self.n();
        for (i, arc) in self.arcs.iter().enumerate() {
            for w in arc.samples.windows(2) {
                let (q0, p0) = split(&w[0]);
                let (q1, p1) = split(&w[1]);
                let mid_q = (&q0 + &q1) / 2.0;
                let mid_p = (&p0 + &p1) / 2.0;
                let jq = gauge_at(delta, &mid_q);
                let jp = gauge_at(lambda, &mid_p);
                if jq.max(jp) > 1.0 + LIFT_TOL && arc.kind != ArcKind::Glide {
                    return Err(Error::LiftValidationFailed { arc: i, reason: format!("left the body (gauges {jq:.3e}, {jp:.3e})") });
                }
                let dz = &w[1] - &w[0];
                if dz.norm() <= 1e-14 {
                    continue;
                }
                let mut gens = Vec::new();
                let (qq, pp) = match arc.kind {
                    ArcKind::Alpha => (&mid_q, &p0),
                    ArcKind::Beta => (&q0, &mid_p),
                    ArcKind::Glide => (&mid_q, &mid_p),
                };
                if arc.kind != ArcKind::Beta {
                    if !on_boundary(lambda, pp) && arc.kind == ArcKind::Alpha {
                        return Err(Error::LiftValidationFailed { arc: i, reason: "momentum off the boundary".into() });
                    }
                    for g in lambda.normal_cone(&(pp / gauge_at(lambda, pp))) {
                        gens.push(join(&-g, &Vector::zeros(n)));
                    }
                }
                if arc.kind != ArcKind::Alpha {
                    if !on_boundary(delta, qq) && arc.kind == ArcKind::Beta {
                        return Err(Error::LiftValidationFailed { arc: i, reason: "position off the boundary".into() });
                    }
                    for g in delta.normal_cone(&(qq / gauge_at(delta, qq))) {
                        gens.push(join(&Vector::zeros(n), &g));
                    }
                }
                let proj = project_onto_cone(&dz, &gens);
                let tol = if arc.kind == ArcKind::Glide { 1e-2 } else { LIFT_TOL };
                let miss = (&dz - proj).norm() / dz.norm();
                if miss > tol {
                    return Err(Error::LiftValidationFailed { arc: i, reason: format!("velocity off the cone by {miss:.3e}") });
                }
            }
        }
        let closure = self.closure_residual();
        if closure > LIFT_TOL * (1.0 + self.arcs[0].start().norm()) {
            return Err(Error::LiftValidationFailed { arc: self.arcs.len() - 1, reason: format!("twist closure residual {closure:.3e}") });
        }
        Ok(())
    }

    /// Action of the piecewise linear chain through all samples.
    pub fn chain_action(&self) -> Result<f64> {
        let psi = SymplecticMap::from_a(&self.a)?;
        Ok(DiscretePath::new(self.chain(), psi)?.action())
    }

    /// Projection `q_0, ..., q_m` of the arc junctions to `Delta`, repeated
    /// points merged.
    pub fn projected_points(&self) -> Vec<Vector> {
        let mut out: Vec<Vector> = Vec::new();
        for arc in &self.arcs {
            for z in [arc.start(), arc.end()] {
                let (q, _) = split(z);
                if out.last().is_none_or(|l| (l - &q).norm() > 1e-12) {
                    out.push(q);
                }
            }
        }
        out
    }
}

/// Lift of an A-billiard trajectory in `Delta` to `∂(Delta x B(tau))`:
/// straight flights become arcs with `p = -tau v`, reflections become chords
/// in the momentum ball. The endpoint clause decides whether mirrored
/// momentum arcs are attached at `q_0` or `q_m`.
pub fn lift_to_phase(traj: &BilliardTrajectory, delta: &ConvexBody, tau: f64) -> Result<PhaseTrajectory> {
    if !(tau > 0.0) {
        return Err(Error::InvalidBody(format!("momentum radius {tau} must be positive")));
    }
    if !traj.accepted {
        return Err(Error::LiftValidationFailed { arc: 0, reason: "trajectory not accepted".into() });
    }
    let pts = &traj.points;
    let m = pts.len() - 1;
    let u = &traj.velocities;
    let mut arcs = Vec::new();
    let clause = traj.residuals.clause;
    if matches!(clause, EndClause::MirroredStart | EndClause::MirroredBoth) {
        let v_minus = mirror(&u[0], &delta.normal(&pts[0]));
        arcs.push(linear_arc(ArcKind::Beta, join(&pts[0], &(&v_minus * -tau)), join(&pts[0], &(&u[0] * -tau))));
    }
    for j in 0..m {
        let p = &u[j] * -tau;
        arcs.push(linear_arc(ArcKind::Alpha, join(&pts[j], &p), join(&pts[j + 1], &p)));
        if j + 1 < m {
            arcs.push(linear_arc(ArcKind::Beta, join(&pts[j + 1], &p), join(&pts[j + 1], &(&u[j + 1] * -tau))));
        }
    }
    if matches!(clause, EndClause::MirroredEnd | EndClause::MirroredBoth) {
        let v_plus = mirror(&u[m - 1], &delta.normal(&pts[m]));
        arcs.push(linear_arc(ArcKind::Beta, join(&pts[m], &(&u[m - 1] * -tau)), join(&pts[m], &(&v_plus * -tau))));
    }
    let lambda = ConvexBody::ball(Vector::zeros(delta.dim()), tau)?;
    let mut out = PhaseTrajectory { arcs, a: traj.a.clone(), action: 0.0, corner_junctions: Vec::new() };
    out.corner_junctions = (0..out.arcs.len())
        .filter(|&i| {
            let (q, p) = split(out.arcs[i].end());
            on_boundary(delta, &q) && on_boundary(&lambda, &p)
        })
        .collect();
    out.check_cone(delta, &lambda)?;
    out.action = out.chain_action()?;
    Ok(out)
}

/// `sum_j h_Lambda(q_j - q_{j+1})` over consecutive points.
pub fn adl_action(points: &[Vector], lambda: &ConvexBody) -> f64 {
    points.windows(2).map(|w| lambda.support_value(&(&w[0] - &w[1]))).sum()
}

/// Proper, gliding or neither, judged from the samples of each arc.
pub fn classify_phase(traj: &PhaseTrajectory, delta: &ConvexBody, lambda: &ConvexBody) -> PhaseClass {
    let corner = |z: &Vector| {
        let (q, p) = split(z);
        (on_boundary(delta, &q), on_boundary(lambda, &p))
    };
    let mut interior_corner = false;
    let mut all_corner = true;
    let mut q_inside = false;
    let mut p_inside = false;
    let mut any_corner = false;
    for arc in &traj.arcs {
        // chords of a gliding arc cut the corner, so only its samples are probed
        let probes: Vec<Vector> = if arc.kind == ArcKind::Glide {
            arc.samples.clone()
        } else {
            arc.samples
                .windows(2)
                .filter(|w| (&w[1] - &w[0]).norm() > 1e-14)
                .map(|w| (&w[0] + &w[1]) / 2.0)
                .collect()
        };
        for z in &probes {
            let (bq, bp) = corner(z);
            interior_corner |= bq && bp;
            all_corner &= bq && bp;
            q_inside |= !bq;
            p_inside |= !bp;
        }
        let (bq, bp) = corner(arc.end());
        any_corner |= bq && bp;
    }
    if all_corner {
        PhaseClass::Gliding
    } else if !interior_corner && q_inside && p_inside && any_corner {
        PhaseClass::Proper
    } else {
        PhaseClass::Mixed
    }
}

/// `q = (cos t, sin t)`, `p = (sin t, -cos t)` on `∂B^2 x ∂B^2`, `t in [0, 2 pi]`.
pub fn gliding_circle(samples: usize) -> PhaseTrajectory {
    let pts: Vec<Vector> = (0..=samples)
        .map(|k| {
            let t = 2.0 * std::f64::consts::PI * k as f64 / samples as f64;
            Vector::from_vec(vec![t.cos(), t.sin(), t.sin(), -t.cos()])
        })
        .collect();
    let arc = PhaseArc { kind: ArcKind::Glide, samples: pts };
    let mut traj = PhaseTrajectory { arcs: vec![arc], a: Matrix::identity(2, 2), action: 0.0, corner_junctions: vec![0] };
    traj.action = traj.chain_action().expect("identity twist");
    traj
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &[f64]) -> Vector {
        Vector::from_vec(x.to_vec())
    }

    #[test]
    fn adl_examples() {
        let square_path = [v(&[-1.0, -1.0]), v(&[1.0, -1.0]), v(&[1.0, 1.0]), v(&[-1.0, 1.0]), v(&[-1.0, -1.0])];
        let disk = ConvexBody::unit_ball(2);
        assert!((adl_action(&square_path, &disk) - 8.0).abs() < 1e-12);
        let disk2 = ConvexBody::ball(Vector::zeros(2), 2.0).unwrap();
        assert!((adl_action(&square_path, &disk2) - 16.0).abs() < 1e-12);
        let square = ConvexBody::cube(2, 1.0).unwrap();
        let path = [v(&[0.0, 0.0]), v(&[1.0, 1.0]), v(&[0.0, 0.0])];
        assert!((adl_action(&path, &square) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn gliding_circle_is_gliding() {
        let disk = ConvexBody::unit_ball(2);
        let g = gliding_circle(2000);
        assert_eq!(classify_phase(&g, &disk, &disk), PhaseClass::Gliding);
        g.check_cone(&disk, &disk).unwrap();
        assert!((g.action - 2.0 * std::f64::consts::PI).abs() < 1e-4, "{}", g.action);
    }
}
