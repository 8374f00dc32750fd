//! Length bounds for A-billiard trajectories found by the search.

use super::search::SearchOutcome;
use crate::error::Result;
use crate::geometry::ConvexBody;
use crate::inequality::{fingerprint, fixed_depth, InequalityReport, Provenance};
use crate::symplectic::SymplecticMap;
use crate::Matrix;
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct LengthBounds {
    /// Radius of the largest ball centered in `Fix(A)` inside the body.
    pub fixed_inradius: f64,
    pub t_psi: f64,
    pub shortest: Option<f64>,
    pub accepted: usize,
    pub reports: Vec<InequalityReport>,
    /// Reports whose failure would not refute anything.
    pub evidence: Vec<InequalityReport>,
    pub notes: Vec<String>,
}

/// `L >= r t(Psi_A) / 2` for all accepted `L`; `L >= 4 inradius` for
/// `A = I` and symmetric bodies; `xi^A <= min L` when `xi` is supplied;
/// `min L <= pi diam` as evidence.
pub fn length_bound_suite(body: &ConvexBody, a: &Matrix, outcome: &SearchOutcome, xi: Option<(f64, f64)>) -> Result<LengthBounds> {
    let (_, r) = fixed_depth(body, a);
    let t = SymplecticMap::from_a(a)?.t_psi()?.value;
    let lengths = outcome.accepted_lengths();
    let shortest = lengths.iter().copied().reduce(f64::min);
    let tol = 1e-6 * outcome.diameter;
    let inputs = vec![fingerprint(body), fingerprint(a)];
    let mut reports = Vec::new();
    let mut evidence = Vec::new();
    let mut notes = Vec::new();
    if let Some(l) = shortest {
        reports.push(InequalityReport::new("length_vs_t_psi", r * t / 2.0, l, tol, inputs.clone(), (Provenance::ClosedForm, Provenance::Solver)));
        let identity = (a - Matrix::identity(a.nrows(), a.ncols())).amax() == 0.0;
        if identity && body.is_centrally_symmetric() {
            let (rin, _) = body.inradius();
            reports.push(InequalityReport::new("length_vs_inradius", 4.0 * rin, l, tol, inputs.clone(), (Provenance::Oracle, Provenance::Solver)));
            if (l - 4.0 * rin).abs() <= 1e-4 * l {
                let w = body.width().value;
                notes.push(format!("shortest length equals 4 inradius; width {w:.6}, 2 width {:.6}", 2.0 * w));
            }
        }
        if let Some((x, xtol)) = xi {
            reports.push(InequalityReport::new("xi_vs_length", x, l, xtol + tol, inputs.clone(), (Provenance::Solver, Provenance::Solver)));
        }
        let pd = std::f64::consts::PI * outcome.diameter;
        evidence.push(InequalityReport::new("length_vs_pi_diameter", l, pd, tol, inputs, (Provenance::Solver, Provenance::Oracle)));
    } else {
        notes.push("no accepted trajectory".into());
    }
    Ok(LengthBounds { fixed_inradius: r, t_psi: t, shortest, accepted: lengths.len(), reports, evidence, notes })
}
