//! Multi-start shooting search for A-billiard trajectories.

use super::flow::{clamp_into, flow, gauge_at, ray_exit};
use super::trajectory::{a_billiard_residual, BilliardTrajectory};
use crate::error::{Error, Result};
use crate::geometry::ConvexBody;
use crate::linalg::gaussian_vector;
use crate::optim::{nelder_mead, NelderMeadOptions};
use crate::report::stream_seed;
use crate::{Matrix, Vector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

const PENALTY: f64 = 1e3;
const GRAZING_RETRIES: usize = 8;

#[derive(Debug, Clone)]
pub struct SearchConfig {
    pub bounce_counts: Vec<usize>,
    pub restarts: usize,
    pub seed: u64,
    pub max_evals: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self { bounce_counts: (1..=6).collect(), restarts: 64, seed: 0, max_evals: 4000 }
    }
}

#[derive(Debug, Clone)]
pub struct SearchOutcome {
    /// Accepted trajectories, shortest first.
    pub accepted: Vec<BilliardTrajectory>,
    /// Smallest-residual candidate overall.
    pub best_candidate: Option<BilliardTrajectory>,
    pub attempts: usize,
    pub diameter: f64,
}

impl SearchOutcome {
    pub fn shortest(&self) -> Result<&BilliardTrajectory> {
        self.accepted.first().ok_or(Error::NoTrajectoryFound)
    }

    pub fn accepted_lengths(&self) -> Vec<f64> {
        self.accepted.iter().map(|t| t.length).collect()
    }
}

struct Shooter<'a> {
    body: &'a ConvexBody,
    a: &'a Matrix,
    k: usize,
    min_segment: f64,
}

impl Shooter<'_> {
    fn points(&self, x: &[f64]) -> Result<Vec<Vector>> {
        let n = self.body.dim();
        let q0 = clamp_into(self.body, &Vector::from_column_slice(&x[..n]));
        let w = Vector::from_column_slice(&x[n..]);
        if w.norm() < 1e-12 {
            return Err(Error::ZeroDirection);
        }
        let f = flow(self.body, &q0, &w, self.k)?;
        let target = self.a * &q0;
        let last = f.last_point();
        let dir = f.exit_velocity();
        let reach = ray_exit(self.body, last, dir)?.distance;
        let s = (&target - last).dot(dir).clamp(0.0, reach);
        let pts = f.extended(if s < self.min_segment { 0.0 } else { s });
        if pts.len() < 3 || pts.windows(2).any(|w| (&w[1] - &w[0]).norm() < self.min_segment) {
            return Err(Error::DegenerateRay);
        }
        Ok(pts)
    }

    fn objective(&self, x: &[f64]) -> f64 {
        match self.points(x) {
            Ok(p) => {
                let r = a_billiard_residual(self.body, self.a, &p);
                if r.total.is_finite() { r.total } else { PENALTY }
            }
            Err(_) => PENALTY,
        }
    }
}

fn start_point(body: &ConvexBody, rng: &mut ChaCha8Rng) -> Vector {
    let n = body.dim();
    let c = body.reference_point();
    let u = gaussian_vector(n, rng).normalize();
    let reach = 1.0 / gauge_at(body, &(&c + &u)).max(1e-300);
    &c + u * (reach * rng.gen_range(0.0..0.9))
}

/// Shooting search over `(q_0, v_0)` for each bounce count; the final
/// segment runs to the point of the last flight nearest to `A q_0`.
pub fn find_a_billiard(body: &ConvexBody, a: &Matrix, config: &SearchConfig) -> Result<SearchOutcome> {
    let n = body.dim();
    if a.nrows() != n || a.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, found: a.nrows() });
    }
    let diameter = body.diameter().value;
    let jobs: Vec<(usize, usize)> = config
        .bounce_counts
        .iter()
        .flat_map(|&k| (0..config.restarts).map(move |r| (k, r)))
        .filter(|&(k, _)| k >= 1)
        .collect();
    let results: Vec<Option<BilliardTrajectory>> = jobs
        .par_iter()
        .map(|&(k, r)| {
            let shooter = Shooter { body, a, k, min_segment: super::MIN_SEGMENT * diameter };
            let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(config.seed, (k as u64) << 32 | r as u64));
            let q = start_point(body, &mut rng);
            let mut w = gaussian_vector(n, &mut rng).normalize();
            let mut x0: Vec<f64> = q.iter().chain(w.iter()).copied().collect();
            for i in 0..GRAZING_RETRIES {
                if shooter.objective(&x0) < PENALTY {
                    break;
                }
                w[i % n] += 1e-3 * (1u64 << i) as f64;
                x0 = q.iter().chain(w.iter()).copied().collect();
            }
            let mut best = (x0.clone(), shooter.objective(&x0));
            for step in [0.2 * diameter.max(1e-12), 1e-3 * diameter.max(1e-12), 1e-6 * diameter.max(1e-12)] {
                let (x, v) = nelder_mead(
                    |x| shooter.objective(x),
                    &best.0,
                    NelderMeadOptions { step, max_evals: config.max_evals, ftol: 1e-18, xtol: 1e-15 },
                );
                if v <= best.1 {
                    best = (x, v);
                }
            }
            shooter.points(&best.0).ok().map(|p| BilliardTrajectory::from_points(body, a, p))
        })
        .collect();
    let mut accepted: Vec<BilliardTrajectory> = results.iter().flatten().filter(|t| t.accepted).cloned().collect();
    accepted.sort_by(|x, y| x.length.total_cmp(&y.length));
    let best_candidate = results
        .into_iter()
        .flatten()
        .fold(None::<BilliardTrajectory>, |best, t| match best {
            Some(b) if b.residuals.total <= t.residuals.total => Some(b),
            _ => Some(t),
        });
    Ok(SearchOutcome { accepted, best_candidate, attempts: jobs.len(), diameter })
}
