//! Numerical checks of the Brunn–Minkowski type inequalities for `c^Psi`,
//! the intersection concavity, the directional derivative bounds and the
//! `xi^A` estimates.

use crate::capacity::{minimize_capacity, CapacityResult, DiscretePath, SolverConfig};
use crate::error::{Error, Result};
use crate::geometry::polytope::Polytope;
use crate::geometry::ConvexBody;
use crate::linalg::{apply_neg_j, householder_to_e1, null_space, pinv};
use crate::optim::golden_section;
use crate::symplectic::SymplecticMap;
use crate::{Matrix, Vector};
use serde::Serialize;
use std::fmt::Debug;

/// Where a number comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Solver,
    ClosedForm,
    Oracle,
}

/// `lhs <= rhs` up to `tolerance`; `slack = rhs - lhs`.
#[derive(Debug, Clone, Serialize)]
pub struct InequalityReport {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub inputs: Vec<String>,
    pub lhs_provenance: Provenance,
    pub rhs_provenance: Provenance,
}

impl InequalityReport {
    pub fn new(name: &str, lhs: f64, rhs: f64, tolerance: f64, inputs: Vec<String>, provenance: (Provenance, Provenance)) -> Self {
        let slack = rhs - lhs;
        Self {
            name: name.to_string(),
            lhs,
            rhs,
            slack,
            tolerance,
            pass: slack >= -tolerance,
            inputs,
            lhs_provenance: provenance.0,
            rhs_provenance: provenance.1,
        }
    }
}

/// Stable 64-bit FNV-1a digest of a value's debug representation.
pub fn fingerprint<T: Debug + ?Sized>(x: &T) -> String {
    let text = format!("{x:?}");
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in text.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    format!("{h:016x}")
}

fn solver_tol(results: &[&CapacityResult], scale: f64) -> f64 {
    let rel = results.iter().map(|r| r.rel_error).fold(0.0, f64::max);
    3.0 * rel * scale
}

/// Depth of the deepest point of `body` inside `ker(M - I)`.
pub fn fixed_depth(body: &ConvexBody, m: &Matrix) -> (Vector, f64) {
    let d = m.nrows();
    let shift = m - Matrix::identity(d, d);
    let tol = 1e-8 * m.norm().max(1.0);
    let basis = null_space(&shift, tol);
    body.deepest_point_in(&basis, &Vector::zeros(d))
}

// ---------------------------------------------------------------------------
// Brunn–Minkowski

pub struct BmCheck {
    pub report: InequalityReport,
    pub d: CapacityResult,
    pub k: CapacityResult,
    pub sum: CapacityResult,
}

/// `c(D +_p K)^{p/2} >= c(D)^{p/2} + c(K)^{p/2}`.
pub fn bm_check(d: &ConvexBody, k: &ConvexBody, psi: &SymplecticMap, p: f64, config: &SolverConfig) -> Result<BmCheck> {
    let cd = minimize_capacity(d, psi, config)?;
    let ck = minimize_capacity(k, psi, config)?;
    bm_check_with(d, k, psi, p, config, cd, ck)
}

/// [`bm_check`] reusing already computed capacities of `D` and `K`.
pub fn bm_check_with(
    d: &ConvexBody,
    k: &ConvexBody,
    psi: &SymplecticMap,
    p: f64,
    config: &SolverConfig,
    cd: CapacityResult,
    ck: CapacityResult,
) -> Result<BmCheck> {
    if !(p >= 1.0) {
        return Err(Error::InvalidExponent(p));
    }
    if !d.origin_interior() || !k.origin_interior() {
        return Err(Error::HypothesisViolated("D and K must contain 0 in their interiors".into()));
    }
    let sum_body = ConvexBody::psum(d.clone(), k.clone(), p)?;
    let cs = minimize_capacity(&sum_body, psi, config)?;
    let e = 0.5 * p;
    let lhs = cd.value.powf(e) + ck.value.powf(e);
    let rhs = cs.value.powf(e);
    let tol = solver_tol(&[&cd, &ck, &cs], lhs.max(rhs));
    let report = InequalityReport::new(
        &format!("bm_p{p}"),
        lhs,
        rhs,
        tol,
        vec![fingerprint(d), fingerprint(k), fingerprint(psi.matrix())],
        (Provenance::Solver, Provenance::Solver),
    );
    Ok(BmCheck { report, d: cd, k: ck, sum: cs })
}

#[derive(Debug, Clone, Serialize)]
pub struct EqualityProbe {
    /// Fitted dilation in `gamma_D ~ alpha gamma_K + b`.
    pub alpha: f64,
    /// Fitted translation, restricted to `E1`.
    pub b: Vec<f64>,
    /// Time shift of `gamma_K` (fraction of the period) used in the fit.
    pub shift: f64,
    /// RMS fit error relative to the RMS spread of `gamma_D`.
    pub residual: f64,
}

/// Node `i` of a twisted loop extended periodically: `x_{i+N} = Psi x_i`.
fn extended_node(nodes: &[Vector], psi: &SymplecticMap, i: usize) -> Vector {
    let n = nodes.len();
    let mut x = nodes[i % n].clone();
    for _ in 0..i / n {
        x = psi.apply(&x);
    }
    x
}

/// Node of the loop at fractional index `t` in `[0, 2N)` by linear interpolation.
fn sample_loop(nodes: &[Vector], psi: &SymplecticMap, t: f64) -> Vector {
    let i = t.floor();
    let f = t - i;
    let i = i as usize;
    extended_node(nodes, psi, i) * (1.0 - f) + extended_node(nodes, psi, i + 1) * f
}

fn fit_dilation(target: &[Vector], source: &[Vector], e1: &Matrix) -> (f64, Vector, f64) {
    let dim = target[0].len();
    let m = target.len();
    let k = e1.ncols();
    let mut a = Matrix::zeros(m * dim, 1 + k);
    let mut y = Vector::zeros(m * dim);
    for (j, (t, s)) in target.iter().zip(source).enumerate() {
        for r in 0..dim {
            a[(j * dim + r, 0)] = s[r];
            for c in 0..k {
                a[(j * dim + r, 1 + c)] = e1[(r, c)];
            }
            y[j * dim + r] = t[r];
        }
    }
    let sol = pinv(&a, 1e-12) * &y;
    let resid = (&a * &sol - &y).norm();
    let b = if k > 0 { e1 * sol.rows(1, k) } else { Vector::zeros(dim) };
    (sol[0], b, resid)
}

/// Least-squares fit `gamma_D ~ alpha gamma_K(. + s) + b`, `b in E1`, over
/// time shifts `s`.
pub fn bm_equality_probe(carrier_d: &[Vector], carrier_k: &[Vector], psi: &SymplecticMap) -> EqualityProbe {
    let n = carrier_d.len();
    let nk = carrier_k.len();
    let e1 = psi.e1_basis().clone();
    let mean = carrier_d.iter().fold(Vector::zeros(psi.dim()), |a, x| a + x) / n as f64;
    let spread = (carrier_d.iter().map(|x| (x - &mean).norm_squared()).sum::<f64>() / n as f64).sqrt().max(1e-300);
    let cost = |s: f64| {
        let src: Vec<Vector> = (0..n).map(|j| sample_loop(carrier_k, psi, s * nk as f64 + j as f64 * nk as f64 / n as f64)).collect();
        let (alpha, b, resid) = fit_dilation(carrier_d, &src, &e1);
        let rel = resid / (n as f64).sqrt() / spread;
        // a negative factor is a point reflection, not a dilation
        (if alpha > 0.0 { rel } else { 1.0 + rel }, alpha, b)
    };
    let coarse = (0..nk).map(|i| (i, cost(i as f64 / nk as f64).0)).fold((0, f64::INFINITY), |acc, (i, c)| if c < acc.1 { (i, c) } else { acc });
    let lo = (coarse.0 as f64 - 1.0) / nk as f64;
    let hi = (coarse.0 as f64 + 1.0) / nk as f64;
    let (s, _) = golden_section(|s| cost(s.rem_euclid(1.0)).0, lo, hi, 1e-9);
    let s = s.rem_euclid(1.0);
    let (residual, alpha, b) = cost(s);
    EqualityProbe { alpha, b: b.iter().copied().collect(), shift: s, residual }
}

// ---------------------------------------------------------------------------
// Directional derivative

#[derive(Debug, Clone, Serialize)]
pub struct DerivativeEstimate {
    pub c_d: f64,
    pub c_k: f64,
    pub eps: Vec<f64>,
    pub quotients: Vec<f64>,
    /// Richardson extrapolation from the two smallest `eps`.
    pub estimate: f64,
    /// Quotients do not increase as `eps` decreases (within `tolerance`).
    pub monotone: bool,
    /// `(sqrt c(D + eps K) - sqrt c(D)) / eps` does not decrease as `eps` decreases.
    pub sqrt_concave: bool,
    pub lower_bound: f64,
    /// `int h_K(-J z') dt` over the extracted carrier of `D`.
    pub carrier_upper_bound: Option<f64>,
    pub tolerance: f64,
    pub reports: Vec<InequalityReport>,
}

pub const DEFAULT_EPS: [f64; 4] = [0.2, 0.1, 0.05, 0.025];

/// `sum_k h_K(-J (z_{k+1} - z_k))` over a carrier of `D`. On a polytope a
/// step whose endpoints lie on different facets is split along the facet
/// normals, since the carrier itself runs along the facets; a chord would
/// cut the corner and undercount by sublinearity of `h_K`.
pub fn carrier_support_integral(carrier: &DiscretePath, d: &ConvexBody, k: &ConvexBody) -> f64 {
    let poly = d.as_polytope();
    let m = carrier.n_nodes();
    let mut total = 0.0;
    let mut z0 = carrier.node(0);
    for i in 0..m {
        let z1 = carrier.node(i + 1);
        let w = apply_neg_j(&(&z1 - &z0));
        total += match poly {
            Some(p) => split_support(p, &z0, &z1, &w, k),
            None => k.support_value(&w),
        };
        z0 = z1;
    }
    total
}

fn split_support(p: &Polytope, z0: &Vector, z1: &Vector, w: &Vector, k: &ConvexBody) -> f64 {
    let chord = k.support_value(w);
    let tol = 1e-7 * (1.0 + z0.norm().max(z1.norm()));
    let mut normals: Vec<&Vector> = Vec::new();
    for f in p.active_facets(z0, tol).into_iter().chain(p.active_facets(z1, tol)) {
        if !normals.iter().any(|n| (*n - &f.normal).norm() < 1e-12) {
            normals.push(&f.normal);
        }
    }
    if normals.len() < 2 || normals.len() > w.len() {
        return chord;
    }
    let g = Matrix::from_columns(&normals.iter().map(|n| (*n).clone()).collect::<Vec<_>>());
    let coef = pinv(&g, 1e-12) * w;
    let fit = (&g * &coef - w).norm();
    if coef.iter().any(|&c| c < -1e-12 * w.norm()) || fit > 1e-8 * w.norm().max(1e-300) {
        return chord;
    }
    normals.iter().zip(coef.iter()).map(|(n, &c)| c.max(0.0) * k.support_value(n)).sum()
}

/// Finite-difference quotients `(c(D + eps K) - c(D)) / eps` and the bounds
/// `2 sqrt(c(D) c(K)) <= d <= int h_K(-J z_D')`.
pub fn directional_derivative(
    d: &ConvexBody,
    k: &ConvexBody,
    psi: &SymplecticMap,
    eps: &[f64],
    config: &SolverConfig,
) -> Result<DerivativeEstimate> {
    if eps.len() < 2 {
        return Err(Error::InvalidBody("at least two eps values are needed".into()));
    }
    let mut eps = eps.to_vec();
    eps.sort_by(|a, b| b.total_cmp(a));
    let cd = minimize_capacity(d, psi, config)?;
    let no_carrier = SolverConfig { carrier: false, ..config.clone() };
    let ck = minimize_capacity(k, psi, &no_carrier)?;
    let mut sums = Vec::with_capacity(eps.len());
    for &e in &eps {
        let body = ConvexBody::minkowski_sum(d.clone(), k.clone().scaled(e)?)?;
        sums.push(minimize_capacity(&body, psi, &no_carrier)?);
    }
    let quotients: Vec<f64> = sums.iter().zip(&eps).map(|(s, e)| (s.value - cd.value) / e).collect();
    let m = eps.len();
    let (e1, e2) = (eps[m - 2], eps[m - 1]);
    let (q1, q2) = (quotients[m - 2], quotients[m - 1]);
    let estimate = q2 + (q2 - q1) * e2 / (e1 - e2);
    let mut all: Vec<&CapacityResult> = vec![&cd, &ck];
    all.extend(sums.iter());
    let scale = quotients.iter().copied().fold(estimate.abs(), f64::max);
    let tolerance = solver_tol(&all, scale);
    let monotone = quotients.windows(2).all(|w| w[1] <= w[0] + tolerance);
    let sq: Vec<f64> = sums.iter().zip(&eps).map(|(s, e)| (s.value.sqrt() - cd.value.sqrt()) / e).collect();
    let sq_tol = tolerance / (2.0 * cd.value.sqrt());
    let sqrt_concave = sq.windows(2).all(|w| w[1] >= w[0] - sq_tol);
    let lower_bound = 2.0 * (cd.value * ck.value).sqrt();
    let carrier_upper_bound = cd.carrier.as_ref().map(|c| carrier_support_integral(c, d, k));
    let inputs = vec![fingerprint(d), fingerprint(k), fingerprint(psi.matrix())];
    let mut reports = vec![InequalityReport::new(
        "derivative_lower_bound",
        lower_bound,
        estimate,
        tolerance,
        inputs.clone(),
        (Provenance::Solver, Provenance::Solver),
    )];
    if let Some(ub) = carrier_upper_bound {
        reports.push(InequalityReport::new("derivative_carrier_upper_bound", estimate, ub, tolerance, inputs, (Provenance::Solver, Provenance::Solver)));
    }
    Ok(DerivativeEstimate {
        c_d: cd.value,
        c_k: ck.value,
        eps,
        quotients,
        estimate,
        monotone,
        sqrt_concave,
        lower_bound,
        carrier_upper_bound,
        tolerance,
        reports,
    })
}

// ---------------------------------------------------------------------------
// Intersections

fn intersection_with_translate(d: &ConvexBody, k: &ConvexBody, x: &Vector) -> Result<ConvexBody> {
    d.intersection(&k.clone().translate(x)?)
}

/// `Int(D) ∩ Int(x + K) ∩ Fix(Psi)` is nonempty.
fn check_intersection_hypothesis(d: &ConvexBody, k: &ConvexBody, psi: &SymplecticMap, x: &Vector) -> Result<ConvexBody> {
    let body = intersection_with_translate(d, k, x)
        .map_err(|e| Error::HypothesisViolated(format!("D ∩ (x + K) is not a body: {e}")))?;
    let (_, depth) = body.deepest_point_in(psi.e1_basis(), &Vector::zeros(psi.dim()));
    if !(depth > 1e-9 * body.circumradius_bound()) {
        return Err(Error::HypothesisViolated(format!("Int(D) ∩ Fix(Psi) - x misses Int(K) (depth {depth:.3e})")));
    }
    Ok(body)
}

fn in_fix(psi: &SymplecticMap, x: &Vector) -> Result<()> {
    let r = (psi.apply(x) - x).norm();
    if r > 1e-9 * (1.0 + x.norm()) {
        return Err(Error::HypothesisViolated(format!("translation is not fixed by Psi (residual {r:.3e})")));
    }
    Ok(())
}

/// `lambda sqrt c(D ∩ (x+K)) + (1-lambda) sqrt c(D ∩ (y+K)) <= sqrt c(D ∩ (lambda x + (1-lambda) y + K))`
/// for polytopes `D`, `K`.
pub fn intersection_concavity_check(
    d: &ConvexBody,
    k: &ConvexBody,
    psi: &SymplecticMap,
    x: &Vector,
    y: &Vector,
    lambda: f64,
    config: &SolverConfig,
) -> Result<InequalityReport> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::HypothesisViolated(format!("lambda = {lambda} outside [0, 1]")));
    }
    in_fix(psi, x)?;
    in_fix(psi, y)?;
    let bx = check_intersection_hypothesis(d, k, psi, x)?;
    let by = check_intersection_hypothesis(d, k, psi, y)?;
    let z = x * lambda + y * (1.0 - lambda);
    let bz = intersection_with_translate(d, k, &z)?;
    let cfg = SolverConfig { carrier: false, ..config.clone() };
    let cx = minimize_capacity(&bx, psi, &cfg)?;
    let cy = minimize_capacity(&by, psi, &cfg)?;
    let cz = minimize_capacity(&bz, psi, &cfg)?;
    let lhs = lambda * cx.value.sqrt() + (1.0 - lambda) * cy.value.sqrt();
    let rhs = cz.value.sqrt();
    let tol = solver_tol(&[&cx, &cy, &cz], lhs.max(rhs));
    Ok(InequalityReport::new(
        "intersection_concavity",
        lhs,
        rhs,
        tol,
        vec![fingerprint(d), fingerprint(k), fingerprint(psi.matrix()), fingerprint(x.as_slice()), fingerprint(y.as_slice())],
        (Provenance::Solver, Provenance::Solver),
    ))
}

/// `c(D ∩ (x + K)) <= c(D ∩ K)` for centrally symmetric polytopes and `x in Fix(Psi)`.
pub fn symmetric_translation_check(
    d: &ConvexBody,
    k: &ConvexBody,
    psi: &SymplecticMap,
    x: &Vector,
    config: &SolverConfig,
) -> Result<InequalityReport> {
    if !d.is_centrally_symmetric() || !k.is_centrally_symmetric() {
        return Err(Error::HypothesisViolated("D and K must be centrally symmetric".into()));
    }
    in_fix(psi, x)?;
    let bx = check_intersection_hypothesis(d, k, psi, x)?;
    check_intersection_hypothesis(d, k, psi, &-x)?;
    let b0 = intersection_with_translate(d, k, &Vector::zeros(psi.dim()))?;
    let cfg = SolverConfig { carrier: false, ..config.clone() };
    let cx = minimize_capacity(&bx, psi, &cfg)?;
    let c0 = minimize_capacity(&b0, psi, &cfg)?;
    let tol = solver_tol(&[&cx, &c0], cx.value.max(c0.value));
    Ok(InequalityReport::new(
        "symmetric_translation",
        cx.value,
        c0.value,
        tol,
        vec![fingerprint(d), fingerprint(k), fingerprint(psi.matrix()), fingerprint(x.as_slice())],
        (Provenance::Solver, Provenance::Solver),
    ))
}

// ---------------------------------------------------------------------------
// xi^A

/// Fails with `NoFixedInteriorPoint` unless `Fix(A) ∩ Int(Delta)` and
/// `Fix(A^T) ∩ Int(Lambda)` are nonempty.
pub fn check_xi_hypotheses(a: &Matrix, delta: &ConvexBody, lambda: &ConvexBody) -> Result<()> {
    let n = a.nrows();
    if a.ncols() != n || delta.dim() != n || lambda.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, found: delta.dim() });
    }
    let (_, dq) = fixed_depth(delta, a);
    let (_, dp) = fixed_depth(lambda, &a.transpose());
    if !(dq > 1e-9 * delta.circumradius_bound()) || !(dp > 1e-9 * lambda.circumradius_bound()) {
        return Err(Error::NoFixedInteriorPoint);
    }
    Ok(())
}

/// `xi^A_Lambda(Delta) = c^{Psi_A}(Delta x Lambda)`.
pub fn xi(a: &Matrix, delta: &ConvexBody, lambda: &ConvexBody, config: &SolverConfig) -> Result<CapacityResult> {
    check_xi_hypotheses(a, delta, lambda)?;
    let psi = SymplecticMap::from_a(a)?;
    minimize_capacity(&ConvexBody::product(delta.clone(), lambda.clone()), &psi, config)
}

/// `xi(Delta_1 + Delta_2) >= xi(Delta_1) + xi(Delta_2)`.
pub fn xi_superadditivity_check(
    a: &Matrix,
    delta1: &ConvexBody,
    delta2: &ConvexBody,
    lambda: &ConvexBody,
    config: &SolverConfig,
) -> Result<InequalityReport> {
    for (name, body) in [("Delta_1", delta1), ("Delta_2", delta2)] {
        check_xi_hypotheses(a, body, lambda).map_err(|_| Error::HypothesisViolated(format!("Int({name}) ∩ Fix(A) or Int(Lambda) ∩ Fix(A^T) is empty")))?;
    }
    let cfg = SolverConfig { carrier: false, ..config.clone() };
    let x1 = xi(a, delta1, lambda, &cfg)?;
    let x2 = xi(a, delta2, lambda, &cfg)?;
    let sum = ConvexBody::minkowski_sum(delta1.clone(), delta2.clone())?;
    let x12 = xi(a, &sum, lambda, &cfg)?;
    let lhs = x1.value + x2.value;
    let rhs = x12.value;
    let tol = solver_tol(&[&x1, &x2, &x12], lhs.max(rhs));
    Ok(InequalityReport::new(
        "xi_superadditivity",
        lhs,
        rhs,
        tol,
        vec![fingerprint(a), fingerprint(delta1), fingerprint(delta2), fingerprint(lambda)],
        (Provenance::Solver, Provenance::Solver),
    ))
}

/// `r t(Psi_A) / 2 <= xi^A(Delta)` and `xi^A(Delta) <= t(Psi_A) R` for
/// `B(q, r) ⊆ Delta ⊆ B(q, R)`, `Aq = q`.
pub fn xi_sandwich(a: &Matrix, delta: &ConvexBody, r: f64, big_r: f64, config: &SolverConfig) -> Result<(CapacityResult, Vec<InequalityReport>)> {
    let n = a.nrows();
    let x = xi(a, delta, &ConvexBody::unit_ball(n), config)?;
    let t = SymplecticMap::from_a(a)?.t_psi()?.value;
    let tol = solver_tol(&[&x], x.value);
    let inputs = vec![fingerprint(a), fingerprint(delta)];
    let reports = vec![
        InequalityReport::new("xi_lower_inradius", r * t / 2.0, x.value, tol, inputs.clone(), (Provenance::ClosedForm, Provenance::Solver)),
        InequalityReport::new("xi_upper_circumradius", x.value, t * big_r, tol, inputs, (Provenance::Solver, Provenance::ClosedForm)),
    ];
    Ok((x, reports))
}

#[derive(Debug, Clone, Serialize)]
pub struct SlabBound {
    pub xi: f64,
    pub slab_capacity: f64,
    pub width: f64,
    pub width_direction: Vec<f64>,
    pub base_point: Vec<f64>,
    /// Half-length of the truncated free directions.
    pub truncation: f64,
    /// Capacity of the slab truncated at twice the half-length; the
    /// truncation is stable when this agrees with `slab_capacity`.
    pub slab_capacity_wider: Option<f64>,
    pub reports: Vec<InequalityReport>,
}

/// Truncated `Z_Delta = ([-w/2, w/2] x [-L, L]^{n-1}) x ([-1, 1] x [-L, L]^{n-1})`.
pub fn truncated_slab(n: usize, width: f64, half_length: f64) -> Result<ConvexBody> {
    let mut lo = vec![-half_length; 2 * n];
    let mut hi = vec![half_length; 2 * n];
    lo[0] = -width / 2.0;
    hi[0] = width / 2.0;
    lo[n] = -1.0;
    hi[n] = 1.0;
    ConvexBody::boxed(&lo, &hi)
}

/// `xi^A(Delta) <= c^{Psi'}(Z_Delta)` with `Psi'` the conjugate of `Psi_A` by
/// `(q, v) -> (O(q - q0), O v)`, `O u = e_1`, `q0 in H_u ∩ Fix(A)`. For
/// `A = I` the slab capacity is also compared with `2 width(Delta)`.
pub fn xi_slab_upper_bound(a: &Matrix, delta: &ConvexBody, config: &SolverConfig, check_truncation: bool) -> Result<SlabBound> {
    let n = a.nrows();
    let w = delta.width();
    let u = Vector::from_vec(w.direction.clone());
    let plane = delta.midplane(&u);
    // q0 with (A - I) q0 = 0 and <u, q0> = offset
    let mut m = Matrix::zeros(n + 1, n);
    let mut rhs = Vector::zeros(n + 1);
    m.view_mut((0, 0), (n, n)).copy_from(&(a - Matrix::identity(n, n)));
    for j in 0..n {
        m[(n, j)] = u[j];
    }
    rhs[n] = plane.offset;
    let q0 = pinv(&m, 1e-10) * &rhs;
    let resid = (&m * &q0 - &rhs).norm();
    if resid > 1e-8 * (1.0 + plane.offset.abs()) {
        return Err(Error::HypothesisViolated("H_u ∩ Fix(A) is empty".into()));
    }
    let o = householder_to_e1(&u);
    let conj = SymplecticMap::from_a(&(&o * a * o.transpose()))?;
    let cfg = SolverConfig { carrier: false, ..config.clone() };
    let x = xi(a, delta, &ConvexBody::unit_ball(n), &cfg)?;
    let half_length = 10.0 * delta.circumradius_bound().max(1.0);
    let slab = truncated_slab(n, w.value, half_length)?;
    let cz = minimize_capacity(&slab, &conj, &cfg)?;
    let wider = if check_truncation && n > 1 {
        Some(minimize_capacity(&truncated_slab(n, w.value, 2.0 * half_length)?, &conj, &cfg)?.value)
    } else {
        None
    };
    let inputs = vec![fingerprint(a), fingerprint(delta)];
    let mut reports = vec![InequalityReport::new(
        "xi_slab_upper_bound",
        x.value,
        cz.value,
        solver_tol(&[&x, &cz], x.value.max(cz.value)),
        inputs.clone(),
        (Provenance::Solver, Provenance::Solver),
    )];
    if (a - Matrix::identity(n, n)).amax() == 0.0 {
        reports.push(InequalityReport::new(
            "xi_two_width",
            x.value,
            2.0 * w.value,
            solver_tol(&[&x], x.value),
            inputs,
            (Provenance::Solver, Provenance::Oracle),
        ));
    }
    Ok(SlabBound {
        xi: x.value,
        slab_capacity: cz.value,
        width: w.value,
        width_direction: w.direction,
        base_point: q0.iter().copied().collect(),
        truncation: half_length,
        slab_capacity_wider: wider,
        reports,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ConjectureSample {
    pub capacity: f64,
    pub predicted: f64,
    pub ratio: f64,
    pub t_psi: f64,
}

/// Data for the expected identity `c^{Psi_A}(Delta x Delta°) = (2/pi) t(Psi_A)`.
/// Never judged.
pub fn conjecture_sample(a: &Matrix, delta: &ConvexBody, config: &SolverConfig) -> Result<ConjectureSample> {
    let polar = delta.clone().polar()?;
    let x = xi(a, delta, &polar, &SolverConfig { carrier: false, ..config.clone() })?;
    let t = SymplecticMap::from_a(a)?.t_psi()?.value;
    let predicted = 2.0 / std::f64::consts::PI * t;
    Ok(ConjectureSample { capacity: x.value, predicted, ratio: x.value / predicted, t_psi: t })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_sign_convention() {
        let r = InequalityReport::new("x", 1.0, 0.99, 0.02, vec![], (Provenance::Solver, Provenance::Oracle));
        assert!(r.pass);
        assert!((r.slack + 0.01).abs() < 1e-15);
        let r = InequalityReport::new("x", 1.0, 0.9, 0.02, vec![], (Provenance::Solver, Provenance::Oracle));
        assert!(!r.pass);
    }

    #[test]
    fn fingerprint_is_stable() {
        assert_eq!(fingerprint(&[1.0, 2.0]), fingerprint(&[1.0, 2.0]));
        assert_ne!(fingerprint(&[1.0, 2.0]), fingerprint(&[2.0, 1.0]));
    }

    #[test]
    fn equality_probe_recovers_dilation() {
        let psi = SymplecticMap::identity(1);
        let n = 64;
        let circle = |r: f64, phase: f64| -> Vec<Vector> {
            (0..n)
                .map(|k| {
                    let t = 2.0 * std::f64::consts::PI * (k as f64 + phase) / n as f64;
                    Vector::from_vec(vec![r * t.cos() + 0.3, r * t.sin() - 0.1])
                })
                .collect()
        };
        let probe = bm_equality_probe(&circle(2.0, 0.0), &circle(1.0, 0.37), &psi);
        assert!((probe.alpha - 2.0).abs() < 1e-2, "{probe:?}");
        assert!(probe.residual < 1e-3, "{probe:?}");
    }
}
