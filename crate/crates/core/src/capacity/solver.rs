//! Minimisation of the scale-free quotient `I_p(x) / A(x)^{p/2}` over loops
//! with `x(1) = Psi x(0)`, `x(0) in E1^perp`.
//!
//! Loops are parametrised by their increments `d_k = x_{k+1} - x_k`. The start
//! point is recovered as `x_0 = (Psi - I)^+ sum d`, and the only constraint
//! left is that `sum d` lies in `range(Psi - I)`, which is a linear projection.

use super::carrier::{build_carrier, CarrierDiagnostics};
use super::path::DiscretePath;
use crate::error::{Error, Result};
use crate::geometry::ConvexBody;
use crate::linalg::{apply_j, apply_neg_j, exp_sj, gaussian_vector, min_singular_vector};
use crate::optim::{lbfgs_projected, LbfgsOptions};
use crate::report::stream_seed;
use crate::symplectic::SymplecticMap;
use crate::Vector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

#[derive(Debug, Clone, Serialize)]
pub struct SolverConfig {
    pub p: f64,
    pub nodes: usize,
    pub restarts: usize,
    /// L-BFGS iterations per smoothing stage.
    pub max_iter: usize,
    pub seed: u64,
    /// Re-solve on a half-resolution grid to estimate the discretisation error.
    pub estimate_error: bool,
    /// Build and validate the carrier.
    pub carrier: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { p: 2.0, nodes: 256, restarts: 16, max_iter: 2000, seed: 0, estimate_error: true, carrier: true }
    }
}

impl SolverConfig {
    /// Lighter settings for suites that run many solves.
    pub fn fast(seed: u64) -> Self {
        Self { nodes: 128, restarts: 6, max_iter: 1500, seed, ..Self::default() }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Residuals {
    /// RMS of `rho_k + lambda u_k - a0` relative to RMS of `rho_k`.
    pub stationarity: f64,
    /// Smallest smoothing exponent used in the last stage (`None` = exact).
    pub final_smoothing: Option<f64>,
    /// Gap between the smoothed and the exact quotient at the minimiser.
    pub smoothing_gap: f64,
}

#[derive(Debug, Clone)]
pub struct CapacityResult {
    pub value: f64,
    pub p: f64,
    /// Minimising loop normalised to `A = 1`, in coordinates centred at `fixed_point`.
    pub minimizer: DiscretePath,
    /// Carrier on the boundary, in the original coordinates.
    pub carrier: Option<DiscretePath>,
    pub carrier_diagnostics: Option<CarrierDiagnostics>,
    pub carrier_error: Option<Error>,
    /// `lambda_p = -(p/2) mu_p`.
    pub multiplier: f64,
    pub a0: Vector,
    pub fixed_point: Vector,
    pub converged: bool,
    pub restarts_used: usize,
    pub iterations: usize,
    pub residuals: Residuals,
    /// `|c_N - c_{N/2}| / c_N`, floored at [`MIN_REL_ERROR`].
    pub rel_error: f64,
    pub restart_values: Vec<f64>,
}

pub const MIN_REL_ERROR: f64 = 2e-3;

/// Objective data shared by all restarts.
pub(crate) struct Problem<'a> {
    pub body: &'a ConvexBody,
    pub psi: &'a SymplecticMap,
    pub n_nodes: usize,
    pub dim: usize,
    pub p: f64,
}

impl<'a> Problem<'a> {
    fn increments(&self, d: &[f64]) -> Vec<Vector> {
        d.chunks(self.dim).map(Vector::from_column_slice).collect()
    }

    /// Nodes `x_0..=x_N` from increments.
    pub fn nodes(&self, d: &[Vector]) -> Vec<Vector> {
        let sum = d.iter().fold(Vector::zeros(self.dim), |a, b| a + b);
        let mut x = self.psi.shift_pinv() * sum;
        let mut out = Vec::with_capacity(d.len() + 1);
        out.push(x.clone());
        for dk in d {
            x += dk;
            out.push(x.clone());
        }
        out
    }

    pub fn action(&self, x: &[Vector]) -> f64 {
        x.windows(2).map(|w| 0.5 * apply_j(&w[0]).dot(&w[1])).sum()
    }

    /// Project increments onto `{d : P_F sum d = 0}` with `F = ker(Psi^T - I)`.
    pub fn project(&self, g: &mut [f64]) {
        let c = self.psi.cokernel_basis();
        if c.ncols() == 0 {
            return;
        }
        let mut sum = Vector::zeros(self.dim);
        for chunk in g.chunks(self.dim) {
            sum += Vector::from_column_slice(chunk);
        }
        let corr = c * (c.transpose() * sum) / self.n_nodes as f64;
        for chunk in g.chunks_mut(self.dim) {
            for (v, cv) in chunk.iter_mut().zip(corr.iter()) {
                *v -= cv;
            }
        }
    }

    fn i_scale(&self) -> f64 {
        (self.n_nodes as f64).powf(self.p - 1.0) * 0.5f64.powf(self.p)
    }

    /// Quotient only, with the exact support function.
    pub fn exact_value(&self, d: &[f64]) -> Option<f64> {
        let inc = self.increments(d);
        let x = self.nodes(&inc);
        let a = self.action(&x);
        if !(a > 0.0) {
            return None;
        }
        let i: f64 = inc.iter().map(|dk| self.body.support_value(&apply_neg_j(dk)).max(0.0).powf(self.p)).sum::<f64>() * self.i_scale();
        Some(i / a.powf(0.5 * self.p))
    }

    /// Quotient and projected gradient with optional smoothing.
    pub fn value_grad(&self, d: &[f64], s: Option<f64>) -> Option<(f64, Vec<f64>)> {
        let dim = self.dim;
        let n = self.n_nodes;
        let inc = self.increments(d);
        let x = self.nodes(&inc);
        let a = self.action(&x);
        let dn2: f64 = d.iter().map(|v| v * v).sum();
        if !(a > 1e-12 * dn2) {
            return None;
        }
        let p = self.p;
        let mut i_sum = 0.0;
        let mut g_i = vec![0.0; n * dim];
        for (k, dk) in inc.iter().enumerate() {
            let (h, gh) = self.body.support_smooth(&apply_neg_j(dk), s);
            let h = h.max(0.0);
            i_sum += h.powf(p);
            let coef = p * h.powf(p - 1.0);
            let jg = apply_j(&gh) * coef;
            g_i[k * dim..(k + 1) * dim].copy_from_slice(jg.as_slice());
        }
        let scale = self.i_scale();
        let i_val = i_sum * scale;
        for v in g_i.iter_mut() {
            *v *= scale;
        }
        // dA/dx_k
        let mut gx: Vec<Vector> = Vec::with_capacity(n + 1);
        for k in 0..=n {
            let mut g = Vector::zeros(dim);
            if k < n {
                g -= apply_j(&x[k + 1]) * 0.5;
            }
            if k > 0 {
                g += apply_j(&x[k - 1]) * 0.5;
            }
            gx.push(g);
        }
        let total = gx.iter().fold(Vector::zeros(dim), |acc, g| acc + g);
        let through_start = self.psi.shift_pinv().transpose() * total;
        let mut g_a = vec![0.0; n * dim];
        let mut suffix = Vector::zeros(dim);
        for j in (0..n).rev() {
            suffix += &gx[j + 1];
            let gj = &suffix + &through_start;
            g_a[j * dim..(j + 1) * dim].copy_from_slice(gj.as_slice());
        }
        let ap = a.powf(0.5 * p);
        let r = i_val / ap;
        let mut grad: Vec<f64> = g_i.iter().zip(&g_a).map(|(gi, ga)| (gi - 0.5 * p * r * ap / a * ga) / ap).collect();
        self.project(&mut grad);
        Some((r, grad))
    }

    /// Scale increments so that `A = 1`.
    pub fn normalize(&self, d: &mut [f64]) -> bool {
        let inc = self.increments(d);
        let a = self.action(&self.nodes(&inc));
        if !(a > 0.0) {
            return false;
        }
        let f = 1.0 / a.sqrt();
        d.iter_mut().for_each(|v| *v *= f);
        true
    }

    pub fn path(&self, d: &[f64]) -> DiscretePath {
        let inc = self.increments(d);
        let mut x = self.nodes(&inc);
        x.pop();
        DiscretePath::new(x, self.psi.clone()).expect("consistent dimensions")
    }

    /// Increments of the unit-ball characteristic `x(t) = e^{t t(Psi) J} x_0`.
    pub fn ball_start(&self, t_psi: f64) -> Vec<f64> {
        let n = self.psi.n();
        let m = self.psi.matrix() - exp_sj(n, t_psi);
        let x0 = min_singular_vector(&m);
        let mut out = Vec::with_capacity(self.n_nodes * self.dim);
        for k in 0..self.n_nodes {
            let a = exp_sj(n, t_psi * k as f64 / self.n_nodes as f64) * &x0;
            let b = exp_sj(n, t_psi * (k + 1) as f64 / self.n_nodes as f64) * &x0;
            out.extend((b - a).iter());
        }
        self.project(&mut out);
        out
    }

    /// `(Psi - I) c` for a random point `c`: the total increment of a loop
    /// starting at `c`.
    fn twist_drift(&self, rng: &mut ChaCha8Rng) -> Vector {
        let c = gaussian_vector(self.dim, rng) * 0.5;
        self.psi.apply(&c) - c
    }

    /// Random smooth loop with three harmonics plus a linear drift.
    pub fn random_start(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let coeffs: Vec<(Vector, Vector)> = (1..=3)
            .map(|m| (gaussian_vector(self.dim, rng) / m as f64, gaussian_vector(self.dim, rng) / m as f64))
            .collect();
        let drift = self.twist_drift(rng);
        let at = |t: f64| {
            let mut x = &drift * t;
            for (m, (a, b)) in coeffs.iter().enumerate() {
                let w = 2.0 * PI * (m + 1) as f64 * t;
                x += a * w.cos() + b * w.sin();
            }
            x
        };
        let mut out = Vec::with_capacity(self.n_nodes * self.dim);
        for k in 0..self.n_nodes {
            let d = at((k + 1) as f64 / self.n_nodes as f64) - at(k as f64 / self.n_nodes as f64);
            out.extend(d.iter());
        }
        self.project(&mut out);
        out
    }

    /// Random closed polygon with `2..=4` sides, closed up to the twist.
    pub fn polygonal_start(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let sides = rng.gen_range(2..=4usize);
        let edges: Vec<Vector> = (0..sides).map(|_| gaussian_vector(self.dim, rng)).collect();
        let mut edges = edges;
        let open = edges.iter().fold(self.twist_drift(rng), |acc, e| acc - e);
        let last = edges.len() - 1;
        edges[last] += open;
        self.piecewise(&edges)
    }

    /// Billiard-like path from `c = (q_0, p_s)` to `Psi c`: `p` turns to
    /// `-u_0`, then `q` runs through `q_1, .., q_k = (Psi c)_q` with `p = -u_j`
    /// on edge `j`, turning between edges, and finally `p` turns to `(Psi c)_p`.
    pub fn billiard_start(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let n = self.psi.n();
        let k = rng.gen_range(1..=3usize);
        let mut c = gaussian_vector(self.dim, rng);
        let ps = gaussian_vector(n, rng).normalize();
        c.rows_mut(n, n).copy_from(&ps);
        let end = self.psi.apply(&c);
        let mut q: Vec<Vector> = vec![c.rows(0, n).into_owned()];
        q.extend((1..k).map(|_| gaussian_vector(n, rng)));
        q.push(end.rows(0, n).into_owned());
        let u: Vec<Vector> = q.windows(2).map(|w| (&w[1] - &w[0]).normalize()).collect();
        if u.iter().any(|v| !v.iter().all(|x| x.is_finite())) {
            return self.polygonal_start(rng);
        }
        let momentum = |p: Vector| {
            let mut v = Vector::zeros(self.dim);
            v.rows_mut(n, n).copy_from(&p);
            v
        };
        let mut edges = vec![momentum(-&u[0] - &ps)];
        for j in 0..k {
            let mut a = Vector::zeros(self.dim);
            a.rows_mut(0, n).copy_from(&(&q[j + 1] - &q[j]));
            edges.push(a);
            if j + 1 < k {
                edges.push(momentum(&u[j] - &u[j + 1]));
            }
        }
        edges.push(momentum(end.rows(n, n).into_owned() + &u[k - 1]));
        self.piecewise(&edges)
    }

    /// Increments traversing `edges` in order at constant speed per edge.
    fn piecewise(&self, edges: &[Vector]) -> Vec<f64> {
        let sides = edges.len();
        let mut out = Vec::with_capacity(self.n_nodes * self.dim);
        for k in 0..self.n_nodes {
            let j = k * sides / self.n_nodes;
            let len = (((j + 1) * self.n_nodes).div_ceil(sides) - (j * self.n_nodes).div_ceil(sides)).max(1);
            out.extend((&edges[j] / len as f64).iter());
        }
        self.project(&mut out);
        out
    }
}

struct RestartOutcome {
    value: f64,
    d: Vec<f64>,
    iterations: usize,
    converged: bool,
    smoothed_value: f64,
}

fn stages(body: &ConvexBody) -> Vec<Option<f64>> {
    if body.is_smooth() {
        vec![None]
    } else {
        vec![Some(16.0), Some(64.0), Some(256.0), Some(1024.0)]
    }
}

fn run_stages(problem: &Problem, mut d: Vec<f64>, stages: &[Option<f64>], max_iter: usize) -> RestartOutcome {
    let mut iterations = 0;
    let mut converged = false;
    let mut smoothed_value = f64::INFINITY;
    for &s in stages {
        if !problem.normalize(&mut d) {
            break;
        }
        let out = lbfgs_projected(
            d.clone(),
            |x| problem.value_grad(x, s),
            |x| problem.project(x),
            LbfgsOptions { max_iter, ftol: 1e-13, gtol: 1e-10, memory: 12 },
        );
        iterations += out.iterations;
        converged = out.converged;
        if out.value.is_finite() {
            d = out.x;
            smoothed_value = out.value;
        }
    }
    problem.normalize(&mut d);
    let value = problem.exact_value(&d).unwrap_or(f64::INFINITY);
    RestartOutcome { value, d, iterations, converged, smoothed_value }
}

/// Mix a start with the ball characteristic until its action is clearly positive.
fn ensure_positive(problem: &Problem, mut d: Vec<f64>, ball: &[f64]) -> Vec<f64> {
    let norm = |v: &[f64]| v.iter().map(|a| a * a).sum::<f64>().sqrt();
    let bn = norm(ball).max(1e-300);
    for _ in 0..6 {
        let inc: Vec<Vector> = d.chunks(problem.dim).map(Vector::from_column_slice).collect();
        let a = problem.action(&problem.nodes(&inc));
        let dn = norm(&d);
        if a > 0.05 * dn * dn / problem.n_nodes as f64 {
            return d;
        }
        let f = dn / bn;
        for (v, b) in d.iter_mut().zip(ball) {
            *v += f * b;
        }
    }
    d
}

/// Fixed point of `Psi` deep inside the body.
pub fn fixed_interior_point(body: &ConvexBody, psi: &SymplecticMap) -> Result<(Vector, f64)> {
    let basis = psi.e1_basis();
    let zero = Vector::zeros(psi.dim());
    let (x, depth) = if basis.ncols() == 0 {
        (zero.clone(), body.depth_at(&zero))
    } else {
        let (x, _) = body.deepest_point_in(basis, &zero);
        let dx = body.depth_at(&x);
        let d0 = body.depth_at(&zero);
        if d0 >= dx {
            (zero, d0)
        } else {
            (x, dx)
        }
    };
    if !(depth > 1e-9 * body.circumradius_bound()) {
        return Err(Error::NoFixedInteriorPoint);
    }
    Ok((x, depth))
}

/// Discretised extended EHZ capacity `c^Psi(D)`.
pub fn minimize_capacity(body: &ConvexBody, psi: &SymplecticMap, config: &SolverConfig) -> Result<CapacityResult> {
    if body.dim() != psi.dim() {
        return Err(Error::DimensionMismatch { expected: psi.dim(), found: body.dim() });
    }
    if !(config.p > 1.0) || !config.p.is_finite() {
        return Err(Error::InvalidExponent(config.p));
    }
    if config.nodes < 16 {
        return Err(Error::InvalidBody(format!("at least 16 nodes required, got {}", config.nodes)));
    }
    let (fixed_point, _) = fixed_interior_point(body, psi)?;
    let centred = body.clone().translate(&-&fixed_point)?;
    let problem = Problem { body: &centred, psi, n_nodes: config.nodes, dim: psi.dim(), p: config.p };
    let t_psi = psi.t_psi()?.value;
    let ball = problem.ball_start(t_psi);
    let stages = stages(&centred);
    let restarts = config.restarts.max(1);
    let outcomes: Vec<RestartOutcome> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let start = if r == 0 {
                ball.clone()
            } else {
                let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(config.seed, r as u64));
                let start = match r % 4 {
                    1 | 3 => problem.billiard_start(&mut rng),
                    2 => problem.random_start(&mut rng),
                    _ => problem.polygonal_start(&mut rng),
                };
                ensure_positive(&problem, start, &ball)
            };
            // billiard starts already sit near a corner characteristic; coarse
            // smoothing would round it off
            let from = if r % 2 == 1 { stages.len().saturating_sub(2) } else { 0 };
            run_stages(&problem, start, &stages[from..], config.max_iter)
        })
        .collect();
    let restart_values: Vec<f64> = outcomes.iter().map(|o| o.value).collect();
    let best_idx = restart_values
        .iter()
        .enumerate()
        .fold(None, |acc: Option<(usize, f64)>, (i, &v)| match acc {
            Some((_, bv)) if bv <= v => acc,
            _ if v.is_finite() => Some((i, v)),
            _ => acc,
        })
        .map(|(i, _)| i)
        .ok_or(Error::NoFixedInteriorPoint)?;
    let best = &outcomes[best_idx];
    let mu = best.value;
    let value = mu.powf(2.0 / config.p);
    let iterations = outcomes.iter().map(|o| o.iterations).sum();

    let rel_error = if config.estimate_error {
        let half: Vec<f64> = best
            .d
            .chunks(2 * problem.dim)
            .flat_map(|c| {
                let (a, b) = c.split_at(problem.dim.min(c.len()));
                a.iter().zip(b.iter().chain(std::iter::repeat(&0.0))).map(|(x, y)| x + y).collect::<Vec<_>>()
            })
            .collect();
        let coarse = Problem { body: &centred, psi, n_nodes: half.len() / psi.dim(), dim: psi.dim(), p: config.p };
        let last: Vec<Option<f64>> = stages.last().copied().into_iter().collect();
        let out = run_stages(&coarse, half, &last, config.max_iter / 2);
        let c_half = out.value.powf(2.0 / config.p);
        ((value - c_half).abs() / value).max(MIN_REL_ERROR)
    } else {
        MIN_REL_ERROR
    };

    let minimizer = problem.path(&best.d);
    let mut result = CapacityResult {
        value,
        p: config.p,
        minimizer,
        carrier: None,
        carrier_diagnostics: None,
        carrier_error: None,
        multiplier: -0.5 * config.p * mu,
        a0: Vector::zeros(psi.dim()),
        fixed_point: fixed_point.clone(),
        converged: best.converged,
        restarts_used: restarts,
        iterations,
        residuals: Residuals {
            stationarity: f64::NAN,
            final_smoothing: stages.last().copied().flatten(),
            smoothing_gap: (best.smoothed_value - mu).max(0.0) / mu,
        },
        rel_error,
        restart_values,
    };
    let (a0, stationarity) = super::carrier::recover_a0(&result.minimizer, &centred, psi, config.p, mu);
    result.a0 = a0;
    result.residuals.stationarity = stationarity;
    if config.carrier {
        match build_carrier(&result, &centred, psi) {
            Ok((path, diag)) => {
                result.carrier = Some(path.translated(&fixed_point));
                result.carrier_diagnostics = Some(diag);
            }
            Err(e) => result.carrier_error = Some(e),
        }
    }
    Ok(result)
}

/// Capacity without carrier extraction or error estimate.
pub fn capacity_value(body: &ConvexBody, psi: &SymplecticMap, config: &SolverConfig) -> Result<f64> {
    let cfg = SolverConfig { carrier: false, estimate_error: false, ..config.clone() };
    Ok(minimize_capacity(body, psi, &cfg)?.value)
}
