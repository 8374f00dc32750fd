//! The acceptance matrix: criteria 1 to 9 as named groups of checks.

use super::ensemble::{ellipse, random_ellipse, random_ellipsoid, random_gl, random_planar_body, random_polygon};
use super::{stream_seed, CheckRecord};
use crate::billiard::{adl_action, find_a_billiard, length_bound_suite, lift_to_phase, verify_generalized, SearchConfig};
use crate::capacity::{minimize_capacity, CapacityResult, SolverConfig};
use crate::error::{Error, Result};
use crate::geometry::ConvexBody;
use crate::inequality::{
    bm_check, bm_equality_probe, directional_derivative, xi, xi_sandwich, xi_slab_upper_bound, xi_superadditivity_check, Provenance,
    DEFAULT_EPS,
};
use crate::linalg::{block_diag, rotation2};
use crate::symplectic::{random_symplectic, t_psi_a_det, SymplecticMap};
use crate::{Matrix, Vector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;
use std::f64::consts::PI;
use std::path::PathBuf;

use Provenance::{ClosedForm, Oracle, Solver};

#[derive(Debug, Clone, Default)]
pub struct RunConfig {
    pub seed: u64,
    /// Grid size for the solver; criterion 1 defaults to 256, the rest to 128.
    pub nodes: Option<usize>,
    pub restarts: Option<usize>,
    /// Restarts per bounce count in billiard searches.
    pub billiard_restarts: Option<usize>,
    /// Id prefixes (`c4`, `c4-square`); empty runs everything.
    pub only: Vec<String>,
    /// Replacement expected values keyed by check id.
    pub expect: Vec<(String, f64)>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct SuiteOutcome {
    pub records: Vec<CheckRecord>,
}

impl SuiteOutcome {
    pub fn failed(&self) -> Vec<&CheckRecord> {
        self.records.iter().filter(|r| r.counts_as_failure()).collect()
    }

    /// 0 when every counted check passes, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.failed().is_empty() {
            0
        } else {
            1
        }
    }

    pub fn criterion_passes(&self, criterion: u8) -> Option<bool> {
        let rs: Vec<&CheckRecord> = self.records.iter().filter(|r| r.criterion == criterion).collect();
        if rs.is_empty() {
            None
        } else {
            Some(rs.iter().all(|r| !r.counts_as_failure()))
        }
    }
}

struct Ctx<'a> {
    config: &'a RunConfig,
    name: &'a str,
}

impl Ctx<'_> {
    fn seed(&self) -> u64 {
        let h = crate::inequality::fingerprint(self.name);
        stream_seed(self.config.seed, u64::from_str_radix(&h, 16).unwrap_or(0))
    }

    fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed())
    }

    fn solver(&self) -> SolverConfig {
        let base = SolverConfig::fast(self.seed());
        SolverConfig {
            nodes: self.config.nodes.unwrap_or(base.nodes),
            restarts: self.config.restarts.unwrap_or(base.restarts),
            ..base
        }
    }

    fn full_solver(&self) -> SolverConfig {
        let base = SolverConfig { seed: self.seed(), ..SolverConfig::default() };
        SolverConfig {
            nodes: self.config.nodes.unwrap_or(base.nodes),
            restarts: self.config.restarts.unwrap_or(base.restarts),
            ..base
        }
    }

    fn search(&self) -> SearchConfig {
        SearchConfig { restarts: self.config.billiard_restarts.unwrap_or(24), seed: self.seed(), ..SearchConfig::default() }
    }
}

type Check = fn(&Ctx) -> Result<Vec<CheckRecord>>;

struct Group {
    name: String,
    criterion: u8,
    run: Box<dyn Fn(&Ctx) -> Result<Vec<CheckRecord>> + Send + Sync>,
}

fn group(name: &str, criterion: u8, f: Check) -> Group {
    Group { name: name.to_string(), criterion, run: Box::new(f) }
}

fn indexed(name: &str, criterion: u8, count: usize, f: fn(&Ctx, usize) -> Result<Vec<CheckRecord>>) -> Vec<Group> {
    (0..count)
        .map(|i| Group { name: format!("{name}-{i:02}"), criterion, run: Box::new(move |c: &Ctx| f(c, i)) })
        .collect()
}

fn rows(m: &Matrix) -> Vec<Vec<f64>> {
    crate::linalg::to_rows(m)
}

fn cap_tol(results: &[&CapacityResult]) -> f64 {
    3.0 * results.iter().map(|r| r.rel_error * r.value).fold(0.0, f64::max)
}

fn cap_details(r: &CapacityResult) -> serde_json::Value {
    json!({
        "value": r.value,
        "rel_error": r.rel_error,
        "converged": r.converged,
        "restart_values": r.restart_values,
        "stationarity": r.residuals.stationarity,
    })
}

fn psi_a(a: &Matrix) -> Result<SymplecticMap> {
    SymplecticMap::from_a(a)
}

fn minus_identity(n: usize) -> Matrix {
    -Matrix::identity(n, n)
}

// ---------------------------------------------------------------------------
// 1. balls

fn c1_b2(c: &Ctx) -> Result<Vec<CheckRecord>> {
    let r = minimize_capacity(&ConvexBody::unit_ball(2), &SymplecticMap::identity(1), &c.full_solver())?;
    Ok(vec![CheckRecord::close("c1-ball-b2", 1, (r.value, Solver), (PI, ClosedForm), 0.01).with_details(cap_details(&r))])
}

fn c1_b4(c: &Ctx) -> Result<Vec<CheckRecord>> {
    let r = minimize_capacity(&ConvexBody::unit_ball(4), &SymplecticMap::identity(2), &c.full_solver())?;
    Ok(vec![CheckRecord::close("c1-ball-b4", 1, (r.value, Solver), (PI, ClosedForm), 0.02).with_details(cap_details(&r))])
}

// ---------------------------------------------------------------------------
// 2. twisted balls

fn twisted_ball(c: &Ctx, id: &str, psi: SymplecticMap) -> Result<Vec<CheckRecord>> {
    let t = psi.t_psi()?.value;
    let r = minimize_capacity(&ConvexBody::unit_ball(psi.dim()), &psi, &c.solver())?;
    Ok(vec![CheckRecord::close(id, 2, (2.0 * r.value, Solver), (t, Oracle), 0.02)
        .with_details(json!({ "psi": rows(psi.matrix()), "t_psi": t, "capacity": cap_details(&r) }))])
}

fn c2_rot_pi3(c: &Ctx) -> Result<Vec<CheckRecord>> {
    twisted_ball(c, "c2-twist-rot-pi3", psi_a(&rotation2(PI / 3.0))?)
}

fn c2_rot_pi2(c: &Ctx) -> Result<Vec<CheckRecord>> {
    twisted_ball(c, "c2-twist-rot-pi2", psi_a(&rotation2(PI / 2.0))?)
}

fn c2_minus_i(c: &Ctx) -> Result<Vec<CheckRecord>> {
    twisted_ball(c, "c2-twist-minus-i", psi_a(&minus_identity(1))?)
}

fn c2_random_n1(c: &Ctx) -> Result<Vec<CheckRecord>> {
    twisted_ball(c, "c2-twist-random-n1", SymplecticMap::new(random_symplectic(1, &mut c.rng()))?)
}

fn c2_random_n2(c: &Ctx) -> Result<Vec<CheckRecord>> {
    twisted_ball(c, "c2-twist-random-n2", SymplecticMap::new(random_symplectic(2, &mut c.rng()))?)
}

// ---------------------------------------------------------------------------
// 3. t(Psi)

fn c3_closed_forms(_: &Ctx) -> Result<Vec<CheckRecord>> {
    let mut out = Vec::new();
    for n in [1, 2] {
        let t = SymplecticMap::identity(n).t_psi()?.value;
        out.push(CheckRecord::close_abs(&format!("c3-t-identity-n{n}"), 3, (t, Solver), (2.0 * PI, ClosedForm), 1e-8));
        let t = psi_a(&minus_identity(n))?.t_psi()?.value;
        out.push(CheckRecord::close_abs(&format!("c3-t-minus-i-n{n}"), 3, (t, Solver), (PI, ClosedForm), 1e-8));
    }
    for (id, thetas) in [("c3-t-rotation-single", vec![1.1]), ("c3-t-rotation-pair", vec![1.9, 0.7]), ("c3-t-rotation-triple", vec![2.5, 0.4, 3.0])] {
        let a = block_diag(&thetas.iter().map(|&t| rotation2(t)).collect::<Vec<_>>());
        let t = psi_a(&a)?.t_psi()?.value;
        let smallest = thetas.iter().copied().fold(f64::INFINITY, f64::min);
        out.push(CheckRecord::close_abs(id, 3, (t, Solver), (smallest, ClosedForm), 1e-8).with_details(json!({ "thetas": thetas })));
    }
    Ok(out)
}

fn c3_a_det(c: &Ctx, i: usize) -> Result<Vec<CheckRecord>> {
    let mut rng = c.rng();
    let n = 1 + i % 3;
    let a = random_gl(n, &mut rng);
    let t = psi_a(&a)?.t_psi()?.value;
    let u = t_psi_a_det(&a)?.value;
    Ok(vec![CheckRecord::close_abs(&format!("c3-t-adet-{i:02}"), 3, (t, Solver), (u, Solver), 1e-8)
        .with_details(json!({ "a": rows(&a) }))])
}

// ---------------------------------------------------------------------------
// 4. planar area

fn area_check(c: &Ctx, id: &str, body: &ConvexBody, area: f64) -> Result<Vec<CheckRecord>> {
    let r = minimize_capacity(body, &SymplecticMap::identity(1), &c.solver())?;
    Ok(vec![CheckRecord::close(id, 4, (r.value, Solver), (area, Oracle), 0.02).with_details(cap_details(&r))])
}

fn c4_polygon(c: &Ctx, i: usize) -> Result<Vec<CheckRecord>> {
    let body = random_polygon(&mut c.rng());
    let p = body.as_polytope().ok_or_else(|| Error::InvalidBody("expected a polygon".into()))?;
    let area = p.area_2d().ok_or_else(|| Error::InvalidBody("expected a polygon".into()))?;
    let vertices: Vec<Vec<f64>> = p.vertices.iter().map(|v| v.iter().copied().collect()).collect();
    let mut out = area_check(c, &format!("c4-polygon-{i:02}"), &body, area)?;
    out[0].details["vertices"] = json!(vertices);
    Ok(out)
}

fn c4_ellipse(c: &Ctx, i: usize) -> Result<Vec<CheckRecord>> {
    let mut rng = c.rng();
    let (a, b) = (rng.gen_range(0.6..1.5), rng.gen_range(0.6..1.5));
    let theta = rng.gen_range(0.0..PI);
    let center = Vector::from_vec(vec![rng.gen_range(-0.2..0.2), rng.gen_range(-0.2..0.2)]);
    let mut out = area_check(c, &format!("c4-ellipse-{i:02}"), &ellipse(a, b, theta, &center), PI * a * b)?;
    out[0].details["semi_axes"] = json!([a, b]);
    Ok(out)
}

fn c4_square(c: &Ctx) -> Result<Vec<CheckRecord>> {
    area_check(c, "c4-square", &ConvexBody::cube(2, 1.0)?, 4.0)
}

// ---------------------------------------------------------------------------
// 5. scaling and translation

fn scaling(c: &Ctx, id: &str, body: ConvexBody, psi: &SymplecticMap) -> Result<Vec<CheckRecord>> {
    let cfg = SolverConfig { carrier: false, ..c.solver() };
    let r1 = minimize_capacity(&body, psi, &cfg)?;
    let r2 = minimize_capacity(&body.scaled(2.0)?, psi, &cfg)?;
    Ok(vec![CheckRecord::close(id, 5, (4.0 * r1.value, Solver), (r2.value, Solver), 0.02)
        .with_details(json!({ "c": cap_details(&r1), "c_2d": cap_details(&r2), "psi": rows(psi.matrix()) }))])
}

fn translation(c: &Ctx, id: &str, body: ConvexBody, psi: &SymplecticMap, by: Vector) -> Result<Vec<CheckRecord>> {
    let r = (psi.apply(&by) - &by).norm();
    if r > 1e-12 {
        return Err(Error::HypothesisViolated(format!("translation not in Fix(Psi) (residual {r:.3e})")));
    }
    let cfg = SolverConfig { carrier: false, ..c.solver() };
    let r0 = minimize_capacity(&body, psi, &cfg)?;
    let r1 = minimize_capacity(&body.translate(&by)?, psi, &cfg)?;
    Ok(vec![CheckRecord::close(id, 5, (r1.value, Solver), (r0.value, Solver), 0.01).with_details(json!({
        "c": cap_details(&r0),
        "c_translated": cap_details(&r1),
        "by": by.iter().copied().collect::<Vec<_>>(),
    }))])
}

fn c5_scale_polygon(c: &Ctx) -> Result<Vec<CheckRecord>> {
    scaling(c, "c5-scale-polygon", random_polygon(&mut c.rng()), &SymplecticMap::identity(1))
}

fn c5_scale_ellipse_minus_i(c: &Ctx) -> Result<Vec<CheckRecord>> {
    scaling(c, "c5-scale-ellipse-minus-i", random_ellipse(&mut c.rng()), &psi_a(&minus_identity(1))?)
}

fn c5_scale_ellipsoid_rot(c: &Ctx) -> Result<Vec<CheckRecord>> {
    scaling(c, "c5-scale-ellipsoid-rot", random_ellipsoid(4, &mut c.rng()), &psi_a(&rotation2(PI / 3.0))?)
}

fn c5_translate_polygon(c: &Ctx) -> Result<Vec<CheckRecord>> {
    let mut rng = c.rng();
    let body = random_polygon(&mut rng);
    let by = Vector::from_vec(vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]);
    translation(c, "c5-translate-polygon", body, &SymplecticMap::identity(1), by)
}

fn c5_translate_ellipsoid_reflection(c: &Ctx) -> Result<Vec<CheckRecord>> {
    let mut rng = c.rng();
    let body = random_ellipsoid(4, &mut rng);
    let a = Matrix::from_diagonal(&Vector::from_vec(vec![1.0, -1.0]));
    let by = Vector::from_vec(vec![rng.gen_range(-1.0..1.0), 0.0, rng.gen_range(-1.0..1.0), 0.0]);
    translation(c, "c5-translate-ellipsoid-reflection", body, &psi_a(&a)?, by)
}

fn c5_translate_square(c: &Ctx) -> Result<Vec<CheckRecord>> {
    translation(c, "c5-translate-square", ConvexBody::cube(2, 1.0)?, &SymplecticMap::identity(1), Vector::from_vec(vec![3.0, -2.0]))
}

// ---------------------------------------------------------------------------
// 6. Brunn-Minkowski

fn bm_psi(i: usize) -> Result<(&'static str, SymplecticMap)> {
    Ok(match i % 3 {
        0 => ("identity", SymplecticMap::identity(1)),
        1 => ("rot-pi3", psi_a(&rotation2(PI / 3.0))?),
        _ => ("minus-i", psi_a(&minus_identity(1))?),
    })
}

fn c6_pair(c: &Ctx, i: usize) -> Result<Vec<CheckRecord>> {
    let mut rng = c.rng();
    let p = if i.is_multiple_of(2) { 1.0 } else { 2.0 };
    let (label, psi) = bm_psi(i)?;
    let (d, k) = if psi.dim() == 4 {
        (random_ellipsoid(4, &mut rng), random_ellipsoid(4, &mut rng))
    } else {
        (random_planar_body(&mut rng), random_planar_body(&mut rng))
    };
    let cfg = SolverConfig { carrier: false, ..c.solver() };
    let b = bm_check(&d, &k, &psi, p, &cfg)?;
    Ok(vec![CheckRecord::from_report(&format!("c6-bm-{i:02}"), 6, &b.report).with_details(json!({
        "p": p,
        "psi": label,
        "c_d": b.d.value,
        "c_k": b.k.value,
        "c_sum": b.sum.value,
    }))])
}

fn homothets(c: &Ctx, id: &str, k: ConvexBody, psi: &SymplecticMap, p: f64, alpha: f64) -> Result<Vec<CheckRecord>> {
    let d = k.clone().scaled(alpha)?;
    let b = bm_check(&d, &k, psi, p, &c.solver())?;
    let mut out = vec![CheckRecord::close_abs(
        &format!("{id}-equality"),
        6,
        (b.report.lhs, Solver),
        (b.report.rhs, Solver),
        b.report.tolerance,
    )
    .with_inputs(b.report.inputs.clone())
    .with_details(json!({ "p": p, "alpha": alpha }))];
    match (&b.d.carrier, &b.k.carrier) {
        (Some(cd), Some(ck)) => {
            let probe = bm_equality_probe(cd.nodes(), ck.nodes(), psi);
            out.push(
                CheckRecord::le(&format!("{id}-probe"), 6, (probe.residual, Solver), (1e-2, ClosedForm), 0.0)
                    .with_details(json!({ "alpha": probe.alpha, "expected_alpha": alpha, "shift": probe.shift })),
            );
        }
        _ => out.push(CheckRecord::error(&format!("{id}-probe"), 6, "carrier unavailable".into())),
    }
    Ok(out)
}

fn c6_homothet_triangle(c: &Ctx) -> Result<Vec<CheckRecord>> {
    let v = |x: f64, y: f64| Vector::from_vec(vec![x, y]);
    let k = ConvexBody::polytope(&[v(1.0, 0.0), v(-0.5, 0.8), v(-0.4, -0.9)])?;
    homothets(c, "c6-homothet-triangle", k, &SymplecticMap::identity(1), 1.0, 2.0)
}

fn c6_homothet_ellipse(c: &Ctx) -> Result<Vec<CheckRecord>> {
    let k = random_ellipse(&mut c.rng());
    homothets(c, "c6-homothet-ellipse", k, &psi_a(&minus_identity(1))?, 2.0, 1.5)
}

fn c6_homothet_ellipsoid(c: &Ctx) -> Result<Vec<CheckRecord>> {
    let k = random_ellipsoid(4, &mut c.rng());
    homothets(c, "c6-homothet-ellipsoid", k, &psi_a(&rotation2(PI / 3.0))?, 1.0, 0.5)
}

// ---------------------------------------------------------------------------
// 7. directional derivative

fn c7_ball(c: &Ctx) -> Result<Vec<CheckRecord>> {
    let disk = ConvexBody::unit_ball(2);
    let d = directional_derivative(&disk, &disk, &SymplecticMap::identity(1), &DEFAULT_EPS, &c.solver())?;
    let details = json!({ "eps": d.eps, "quotients": d.quotients, "estimate": d.estimate });
    let mut out = vec![
        CheckRecord::close("c7-ball-estimate", 7, (d.estimate, Solver), (2.0 * PI, ClosedForm), 0.02).with_details(details.clone()),
        CheckRecord::holds("c7-ball-monotone", 7, d.monotone, Solver).with_details(details),
    ];
    for r in &d.reports {
        out.push(CheckRecord::from_report(&format!("c7-ball-{}", r.name.trim_start_matches("derivative_").replace('_', "-")), 7, r));
    }
    Ok(out)
}

fn c7_pair(c: &Ctx, i: usize) -> Result<Vec<CheckRecord>> {
    let mut rng = c.rng();
    let (dd, kk) = (random_planar_body(&mut rng), random_planar_body(&mut rng));
    let d = directional_derivative(&dd, &kk, &SymplecticMap::identity(1), &DEFAULT_EPS, &c.solver())?;
    let id = format!("c7-pair-{i:02}");
    let details = json!({ "eps": d.eps, "quotients": d.quotients, "estimate": d.estimate, "c_d": d.c_d, "c_k": d.c_k });
    let mut out = Vec::new();
    let lower = d.reports.iter().find(|r| r.name == "derivative_lower_bound");
    let upper = d.reports.iter().find(|r| r.name == "derivative_carrier_upper_bound");
    match lower {
        Some(r) => out.push(CheckRecord::from_report(&format!("{id}-lower"), 7, r).with_details(details.clone())),
        None => out.push(CheckRecord::error(&format!("{id}-lower"), 7, "missing lower bound".into())),
    }
    match upper {
        Some(r) => out.push(CheckRecord::from_report(&format!("{id}-upper"), 7, r).with_details(details.clone())),
        None => out.push(CheckRecord::error(&format!("{id}-upper"), 7, "carrier unavailable".into())),
    }
    out.push(CheckRecord::holds(&format!("{id}-sqrt-concave"), 7, d.sqrt_concave, Solver).with_details(details.clone()));
    out.push(CheckRecord::holds(&format!("{id}-monotone"), 7, d.monotone, Solver).with_details(details).evidence());
    Ok(out)
}

// ---------------------------------------------------------------------------
// 8. xi

fn c8_interval(c: &Ctx) -> Result<Vec<CheckRecord>> {
    let one = ConvexBody::cube(1, 1.0)?;
    let r = xi(&Matrix::identity(1, 1), &one, &one, &c.solver())?;
    Ok(vec![CheckRecord::close("c8-xi-interval", 8, (r.value, Solver), (4.0, ClosedForm), 0.02).with_details(cap_details(&r))])
}

fn twist2(label: &str) -> Matrix {
    match label {
        "identity" => Matrix::identity(2, 2),
        "rot-pi2" => rotation2(PI / 2.0),
        _ => minus_identity(2),
    }
}

fn c8_sandwich(c: &Ctx, i: usize) -> Result<Vec<CheckRecord>> {
    let r = [0.5, 1.0][i / 3];
    let label = ["identity", "rot-pi2", "minus-i"][i % 3];
    let a = twist2(label);
    let body = ConvexBody::ball(Vector::zeros(2), r)?;
    let (x, reports) = xi_sandwich(&a, &body, r, r, &SolverConfig { carrier: false, ..c.solver() })?;
    let t = psi_a(&a)?.t_psi()?.value;
    let details = json!({ "r": r, "a": label, "xi": x.value, "t_psi": t });
    Ok(reports
        .iter()
        .map(|rep| {
            let side = if rep.name.contains("lower") { "lower" } else { "upper" };
            CheckRecord::from_report(&format!("c8-sandwich-{i:02}-{side}"), 8, rep).with_details(details.clone())
        })
        .collect())
}

fn c8_superadditivity(c: &Ctx, i: usize) -> Result<Vec<CheckRecord>> {
    let mut rng = c.rng();
    let label = ["identity", "rot-pi2", "minus-i"][i % 3];
    let a = twist2(label);
    let (d1, d2) = (random_planar_body(&mut rng), random_planar_body(&mut rng));
    let rep = xi_superadditivity_check(&a, &d1, &d2, &ConvexBody::unit_ball(2), &c.solver())?;
    Ok(vec![CheckRecord::from_report(&format!("c8-superadditivity-{i:02}"), 8, &rep).with_details(json!({ "a": label }))])
}

fn c8_slab(c: &Ctx, i: usize) -> Result<Vec<CheckRecord>> {
    let mut rng = c.rng();
    let body = match i {
        0 => ConvexBody::cube(2, 1.0)?,
        1 => ConvexBody::unit_ball(2),
        2 | 3 => random_polygon(&mut rng),
        _ => random_ellipse(&mut rng),
    };
    let s = xi_slab_upper_bound(&Matrix::identity(2, 2), &body, &c.solver(), false)?;
    let details = json!({ "xi": s.xi, "slab_capacity": s.slab_capacity, "width": s.width, "truncation": s.truncation });
    Ok(s.reports
        .iter()
        .map(|r| {
            let tag = if r.name == "xi_two_width" { "two-width" } else { "slab" };
            CheckRecord::from_report(&format!("c8-slab-{i:02}-{tag}"), 8, r).with_details(details.clone())
        })
        .collect())
}

// ---------------------------------------------------------------------------
// 9. billiards

fn lift_checks(id: &str, body: &ConvexBody, traj: &crate::billiard::BilliardTrajectory) -> Vec<CheckRecord> {
    match lift_to_phase(traj, body, 1.0) {
        Ok(ph) => {
            let adl = adl_action(&traj.closed_points(), &ConvexBody::unit_ball(body.dim()));
            vec![
                CheckRecord::close_abs(&format!("{id}-lift-action"), 9, (ph.action, Solver), (traj.length, Solver), 1e-6),
                CheckRecord::close_abs(&format!("{id}-lift-adl"), 9, (ph.action, Solver), (adl, Solver), 1e-9),
            ]
        }
        Err(e) => vec![CheckRecord::error(&format!("{id}-lift"), 9, e.to_string())],
    }
}

fn c9_disk(c: &Ctx) -> Result<Vec<CheckRecord>> {
    let disk = ConvexBody::unit_ball(2);
    let a = Matrix::identity(2, 2);
    let out = find_a_billiard(&disk, &a, &c.search())?;
    let s = out.shortest()?;
    let (rin, _) = disk.inradius();
    let details = json!({ "trajectory": s.to_record(), "accepted": out.accepted.len() });
    let mut records = vec![
        CheckRecord::close("c9-disk-shortest", 9, (s.length, Solver), (4.0, ClosedForm), 0.01).with_details(details.clone()),
        CheckRecord::close("c9-disk-inradius", 9, (s.length, Solver), (4.0 * rin, Oracle), 0.01).with_details(details),
    ];
    records.extend(lift_checks("c9-disk", &disk, s));
    let lb = length_bound_suite(&disk, &a, &out, None)?;
    for r in &lb.evidence {
        records.push(CheckRecord::from_report("c9-disk-pi-diameter", 9, r).evidence());
    }
    Ok(records)
}

fn c9_square(c: &Ctx) -> Result<Vec<CheckRecord>> {
    let square = ConvexBody::cube(2, 1.0)?;
    let a = Matrix::identity(2, 2);
    let cfg = SearchConfig { bounce_counts: vec![1], ..c.search() };
    let out = find_a_billiard(&square, &a, &cfg)?;
    let s = out.shortest()?;
    let report = verify_generalized(&s.points, &square, &a);
    let two_bounce = s.points.len() == 3;
    Ok(vec![
        CheckRecord::holds("c9-square-generalized", 9, report.pass && two_bounce, Solver)
            .with_details(json!({ "trajectory": s.to_record(), "clauses": report.clauses })),
        CheckRecord::close("c9-square-length", 9, (s.length, Solver), (4.0 * square.inradius().0, Oracle), 0.01),
    ])
}

fn c9_disk_minus_i(c: &Ctx) -> Result<Vec<CheckRecord>> {
    let disk = ConvexBody::unit_ball(2);
    let a = minus_identity(2);
    let out = find_a_billiard(&disk, &a, &c.search())?;
    let s = out.shortest()?;
    let tol = 1e-6 * out.diameter;
    let mut records = vec![CheckRecord::le("c9-disk-minus-i-bound", 9, (PI / 2.0, ClosedForm), (s.length, Solver), tol)
        .with_details(json!({ "accepted_lengths": out.accepted_lengths(), "shortest": s.to_record() }))];
    records.extend(lift_checks("c9-disk-minus-i", &disk, s));
    Ok(records)
}

fn c9_twist(i: usize, rng: &mut ChaCha8Rng) -> (&'static str, Matrix) {
    match i % 5 {
        0 => ("identity", Matrix::identity(2, 2)),
        1 => ("minus-i", minus_identity(2)),
        2 => ("rot-pi2", rotation2(PI / 2.0)),
        3 => ("rot-theta", rotation2(rng.gen_range(0.3..PI))),
        _ => ("reflection", Matrix::from_diagonal(&Vector::from_vec(vec![1.0, -1.0]))),
    }
}

fn c9_xi_length(c: &Ctx, i: usize) -> Result<Vec<CheckRecord>> {
    let mut rng = c.rng();
    let (label, a) = c9_twist(i, &mut rng);
    let body = if i < 5 {
        ConvexBody::unit_ball(2)
    } else {
        let (p, q, _) = super::ensemble::random_axes(&mut rng);
        ellipse(p, q, 0.0, &Vector::zeros(2))
    };
    let x = xi(&a, &body, &ConvexBody::unit_ball(2), &SolverConfig { carrier: false, ..c.solver() })?;
    let out = find_a_billiard(&body, &a, &c.search())?;
    let id = format!("c9-xi-length-{i:02}");
    let tol = cap_tol(&[&x]);
    let lb = length_bound_suite(&body, &a, &out, Some((x.value, tol)))?;
    let details = json!({ "a": label, "bounds": lb, "accepted_lengths": out.accepted_lengths() });
    let mut records = Vec::new();
    if lb.shortest.is_none() {
        records.push(CheckRecord::error(&id, 9, Error::NoTrajectoryFound.to_string()).with_details(details));
        return Ok(records);
    }
    for r in &lb.reports {
        let suffix = match r.name.as_str() {
            "xi_vs_length" => "",
            "length_vs_t_psi" => "-t-psi",
            _ => "-inradius",
        };
        records.push(CheckRecord::from_report(&format!("{id}{suffix}"), 9, r).with_details(details.clone()));
    }
    for r in &lb.evidence {
        records.push(CheckRecord::from_report(&format!("{id}-pi-diameter"), 9, r).evidence());
    }
    Ok(records)
}

// ---------------------------------------------------------------------------

fn groups() -> Vec<Group> {
    let mut g = vec![
        group("c1-ball-b2", 1, c1_b2),
        group("c1-ball-b4", 1, c1_b4),
        group("c2-twist-rot-pi3", 2, c2_rot_pi3),
        group("c2-twist-rot-pi2", 2, c2_rot_pi2),
        group("c2-twist-minus-i", 2, c2_minus_i),
        group("c2-twist-random-n1", 2, c2_random_n1),
        group("c2-twist-random-n2", 2, c2_random_n2),
        group("c3-t-closed-forms", 3, c3_closed_forms),
    ];
    g.extend(indexed("c3-t-adet", 3, 20, c3_a_det));
    g.extend(indexed("c4-polygon", 4, 10, c4_polygon));
    g.extend(indexed("c4-ellipse", 4, 3, c4_ellipse));
    g.push(group("c4-square", 4, c4_square));
    g.push(group("c5-scale-polygon", 5, c5_scale_polygon));
    g.push(group("c5-scale-ellipse-minus-i", 5, c5_scale_ellipse_minus_i));
    g.push(group("c5-scale-ellipsoid-rot", 5, c5_scale_ellipsoid_rot));
    g.push(group("c5-translate-polygon", 5, c5_translate_polygon));
    g.push(group("c5-translate-ellipsoid-reflection", 5, c5_translate_ellipsoid_reflection));
    g.push(group("c5-translate-square", 5, c5_translate_square));
    g.extend(indexed("c6-bm", 6, 20, c6_pair));
    g.push(group("c6-homothet-triangle", 6, c6_homothet_triangle));
    g.push(group("c6-homothet-ellipse", 6, c6_homothet_ellipse));
    g.push(group("c6-homothet-ellipsoid", 6, c6_homothet_ellipsoid));
    g.push(group("c7-ball", 7, c7_ball));
    g.extend(indexed("c7-pair", 7, 10, c7_pair));
    g.push(group("c8-xi-interval", 8, c8_interval));
    g.extend(indexed("c8-sandwich", 8, 6, c8_sandwich));
    g.extend(indexed("c8-superadditivity", 8, 10, c8_superadditivity));
    g.extend(indexed("c8-slab", 8, 5, c8_slab));
    g.push(group("c9-disk", 9, c9_disk));
    g.push(group("c9-square", 9, c9_square));
    g.push(group("c9-disk-minus-i", 9, c9_disk_minus_i));
    g.extend(indexed("c9-xi-length", 9, 10, c9_xi_length));
    g
}

fn selected(name: &str, only: &[String]) -> bool {
    only.is_empty() || only.iter().any(|f| name.starts_with(f.as_str()) || f.starts_with(name))
}

/// Names of all check groups, in suite order.
pub fn group_names() -> Vec<String> {
    groups().into_iter().map(|g| g.name).collect()
}

/// Runs the selected groups in parallel and returns their records in suite
/// order. Unknown `only` filters or `expect` ids are input errors.
pub fn run_suite(config: &RunConfig) -> Result<SuiteOutcome> {
    let all = groups();
    for f in &config.only {
        if !all.iter().any(|g| selected(&g.name, std::slice::from_ref(f))) {
            return Err(Error::Parse(format!("no check matches '{f}'")));
        }
    }
    let chosen: Vec<&Group> = all.iter().filter(|g| selected(&g.name, &config.only)).collect();
    let batches: Vec<Vec<CheckRecord>> = chosen
        .par_iter()
        .map(|g| {
            let ctx = Ctx { config, name: &g.name };
            (g.run)(&ctx).unwrap_or_else(|e| vec![CheckRecord::error(&g.name, g.criterion, e.to_string())])
        })
        .collect();
    let mut records: Vec<CheckRecord> = batches
        .into_iter()
        .flatten()
        .filter(|r| config.only.is_empty() || config.only.iter().any(|f| r.id.starts_with(f.as_str()) || f.starts_with(&r.id)))
        .collect();
    for (id, value) in &config.expect {
        let hit = records.iter_mut().find(|r| &r.id == id).ok_or_else(|| Error::Parse(format!("no check with id '{id}'")))?;
        hit.override_expected(*value);
    }
    Ok(SuiteOutcome { records })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn group_names_unique() {
        let mut names = group_names();
        let n = names.len();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), n);
    }

    #[test]
    fn filter_matches_prefixes() {
        assert!(selected("c4-square", &["c4".into()]));
        assert!(selected("c4-polygon-03", &["c4-polygon-03".into()]));
        assert!(!selected("c4-square", &["c5".into()]));
    }
}
