//! Carrier reconstruction from a minimiser and boundary/cone verification.

use super::path::DiscretePath;
use super::solver::CapacityResult;
use crate::error::{Error, Result};
use crate::geometry::{ConvexBody, Shape};
use crate::linalg::{angle_to_cone, apply_neg_j};
use crate::symplectic::SymplecticMap;
use crate::Vector;
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct CarrierDiagnostics {
    /// `max |j_D(x*_k) - 1|` before radial normalisation.
    pub raw_max_gauge_residual: f64,
    pub raw_mean_gauge_residual: f64,
    pub action: f64,
    pub action_mismatch: f64,
    pub verification: CarrierReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct CarrierReport {
    pub max_boundary_residual: f64,
    pub worst_boundary_node: usize,
    /// Largest angle (radians) between `-J xdot` and the normal cone.
    pub max_cone_angle: f64,
    pub worst_cone_segment: usize,
    pub closure_residual: f64,
    pub on_boundary: bool,
    pub in_cone: bool,
    pub closed: bool,
}

pub const BOUNDARY_TOL: f64 = 2e-3;
pub const CONE_TOL: f64 = 1e-2;

/// Translation `a0 in E1` in `rho + lambda u = a0` and the relative
/// stationarity residual, where `rho_k` is the gradient of `(h/2)^p` at
/// `-J udot_k` and `lambda = -(p/2) mu`.
pub fn recover_a0(u: &DiscretePath, body: &ConvexBody, psi: &SymplecticMap, p: f64, mu: f64) -> (Vector, f64) {
    let n = u.n_nodes();
    let dim = psi.dim();
    let lambda = -0.5 * p * mu;
    let segs = u.segments();
    let mut rs = Vec::with_capacity(n);
    let mut rho_sq = 0.0;
    for (k, d) in segs.iter().enumerate() {
        let w = apply_neg_j(&(d * n as f64));
        let (h, grad) = body.support_smooth(&w, None);
        let rho = grad * (0.5 * p * (0.5 * h.max(0.0)).powf(p - 1.0));
        rho_sq += rho.norm_squared();
        let mid = (u.node(k) + u.node(k + 1)) * 0.5;
        rs.push(rho + mid * lambda);
    }
    let mean = rs.iter().fold(Vector::zeros(dim), |a, r| a + r) / n as f64;
    let a0 = psi.project_e1(&mean);
    let res_sq: f64 = rs.iter().map(|r| (r - &a0).norm_squared()).sum();
    (a0, (res_sq / rho_sq.max(1e-300)).sqrt())
}

/// `x* = c^{1/2} u + (2/p) c^{(1-p)/2} a0`, pushed radially onto the boundary.
/// Coordinates are those of the (centred) `body`.
pub fn build_carrier(result: &CapacityResult, body: &ConvexBody, psi: &SymplecticMap) -> Result<(DiscretePath, CarrierDiagnostics)> {
    let c = result.value;
    let p = result.p;
    let shift = &result.a0 * (2.0 / p * c.powf(0.5 * (1.0 - p)));
    let raw: Vec<Vector> = result.minimizer.nodes().iter().map(|u| u * c.sqrt() + &shift).collect();
    let gauges: Vec<f64> = raw.iter().map(|x| body.gauge(x)).collect::<Result<_>>()?;
    let residuals: Vec<f64> = gauges.iter().map(|j| (j - 1.0).abs()).collect();
    let raw_max = residuals.iter().copied().fold(0.0, f64::max);
    let raw_mean = residuals.iter().sum::<f64>() / residuals.len() as f64;
    let nodes: Vec<Vector> = raw.iter().zip(&gauges).map(|(x, j)| if *j > 0.0 { x / *j } else { x.clone() }).collect();
    let path = DiscretePath::new(nodes, psi.clone())?;
    let action = path.action();
    let mismatch = (action - c).abs() / c;
    let verification = verify_carrier(&path, body, psi);
    if mismatch > 0.01 || raw_max > 0.1 {
        return Err(Error::CarrierValidationFailed { max_gauge_residual: raw_max, action_mismatch: mismatch, gauge_residuals: residuals });
    }
    Ok((
        path,
        CarrierDiagnostics { raw_max_gauge_residual: raw_max, raw_mean_gauge_residual: raw_mean, action, action_mismatch: mismatch, verification },
    ))
}

fn project_to_boundary(body: &ConvexBody, c: &Vector, z: &Vector) -> Vector {
    let j = body.gauge_about(c, &(z - c));
    if j > 0.0 {
        c + (z - c) / j
    } else {
        z.clone()
    }
}

/// Checks (a) nodes on the boundary, (b) `-J xdot` inside the normal cone
/// (with normals gathered along each segment), (c) the twisted closure.
pub fn verify_carrier(path: &DiscretePath, body: &ConvexBody, psi: &SymplecticMap) -> CarrierReport {
    let c = body.reference_point();
    let n = path.n_nodes();
    let mut max_b = 0.0;
    let mut worst_b = 0;
    for (k, z) in path.nodes().iter().enumerate() {
        let r = (body.gauge_about(&c, &(z - &c)) - 1.0).abs();
        if r > max_b {
            max_b = r;
            worst_b = k;
        }
    }
    let mut max_a = 0.0;
    let mut worst_a = 0;
    for k in 0..n {
        let a = path.node(k);
        let b = path.node(k + 1);
        let v = &b - &a;
        if v.norm() < 1e-14 {
            continue;
        }
        let u = apply_neg_j(&v);
        let seg_tol = v.norm();
        let mut gens = Vec::new();
        for t in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let z = &a * (1.0 - t) + &b * t;
            let y = project_to_boundary(body, &c, &z);
            match body.shape() {
                Shape::Polytope(p) => gens.extend(p.active_facets(&y, seg_tol).into_iter().map(|f| f.normal.clone())),
                _ => gens.extend(body.normal_cone(&y)),
            }
        }
        let ang = angle_to_cone(&u, &gens);
        if ang > max_a {
            max_a = ang;
            worst_a = k;
        }
    }
    let closure = (path.node(n) - psi.apply(&path.nodes()[0])).norm();
    CarrierReport {
        max_boundary_residual: max_b,
        worst_boundary_node: worst_b,
        max_cone_angle: max_a,
        worst_cone_segment: worst_a,
        closure_residual: closure,
        on_boundary: max_b <= BOUNDARY_TOL,
        in_cone: max_a <= CONE_TOL,
        closed: closure <= 1e-9 * (1.0 + path.nodes()[0].norm()),
    }
}
