//! Derivative-free and quasi-Newton minimisers used across the crate.

/// Golden-section minimisation of a unimodal function on `[a, b]`.
pub fn golden_section<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..200 {
        if (b - a).abs() <= tol {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Bisection for a sign change of `f` on `[a, b]`. Returns the midpoint of the
/// final bracket and the number of halvings.
pub fn bisect<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, usize) {
    let mut fa = f(a);
    let mut it = 0;
    while (b - a).abs() > tol && it < 200 {
        let m = 0.5 * (a + b);
        let fm = f(m);
        if fm == 0.0 {
            return (m, it);
        }
        if (fa < 0.0) == (fm < 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
        it += 1;
    }
    (0.5 * (a + b), it)
}

#[derive(Debug, Clone, Copy)]
pub struct NelderMeadOptions {
    pub step: f64,
    pub max_evals: usize,
    pub ftol: f64,
    pub xtol: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self { step: 0.1, max_evals: 4000, ftol: 1e-14, xtol: 1e-12 }
    }
}

/// Nelder–Mead simplex search with dimension-adaptive coefficients.
pub fn nelder_mead<F: FnMut(&[f64]) -> f64>(mut f: F, x0: &[f64], opts: NelderMeadOptions) -> (Vec<f64>, f64) {
    let n = x0.len();
    if n == 0 {
        return (Vec::new(), f(x0));
    }
    let nf = n as f64;
    let (alpha, gamma, rho, sigma) = (1.0, 1.0 + 2.0 / nf, 0.75 - 0.5 / nf, 1.0 - 1.0 / nf);
    let mut simplex: Vec<Vec<f64>> = vec![x0.to_vec()];
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += opts.step;
        simplex.push(x);
    }
    let mut vals: Vec<f64> = simplex.iter().map(|x| f(x)).collect();
    let mut evals = n + 1;
    while evals < opts.max_evals {
        let mut idx: Vec<usize> = (0..=n).collect();
        idx.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        simplex = idx.iter().map(|&i| simplex[i].clone()).collect();
        vals = idx.iter().map(|&i| vals[i]).collect();
        let spread = vals[n] - vals[0];
        let size = simplex[1..]
            .iter()
            .map(|x| x.iter().zip(&simplex[0]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        if spread.abs() <= opts.ftol * (1.0 + vals[0].abs()) && size <= opts.xtol.max(1e-15) * 1e3
            || size <= opts.xtol
        {
            break;
        }
        let mut centroid = vec![0.0; n];
        for x in &simplex[..n] {
            for (c, v) in centroid.iter_mut().zip(x) {
                *c += v / nf;
            }
        }
        let along = |t: f64| -> Vec<f64> {
            centroid.iter().zip(&simplex[n]).map(|(c, w)| c + t * (c - w)).collect()
        };
        let xr = along(alpha);
        let fr = f(&xr);
        evals += 1;
        if fr < vals[0] {
            let xe = along(gamma);
            let fe = f(&xe);
            evals += 1;
            if fe < fr {
                simplex[n] = xe;
                vals[n] = fe;
            } else {
                simplex[n] = xr;
                vals[n] = fr;
            }
        } else if fr < vals[n - 1] {
            simplex[n] = xr;
            vals[n] = fr;
        } else {
            let (xc, fc) = if fr < vals[n] {
                let xc = along(rho * alpha);
                let fc = f(&xc);
                (xc, fc)
            } else {
                let xc = along(-rho);
                let fc = f(&xc);
                (xc, fc)
            };
            evals += 1;
            if fc < vals[n].min(fr) {
                simplex[n] = xc;
                vals[n] = fc;
            } else {
                let best = simplex[0].clone();
                for i in 1..=n {
                    for (v, b) in simplex[i].iter_mut().zip(&best) {
                        *v = b + sigma * (*v - b);
                    }
                    vals[i] = f(&simplex[i]);
                }
                evals += n;
            }
        }
    }
    let (bi, _) = vals
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |(bi, bv), (i, &v)| if v < bv { (i, v) } else { (bi, bv) });
    (simplex[bi].clone(), vals[bi])
}

#[derive(Debug, Clone, Copy)]
pub struct LbfgsOptions {
    pub memory: usize,
    pub max_iter: usize,
    /// Relative decrease below which an iteration counts as stalled.
    pub ftol: f64,
    /// Stop when `|g| |x| <= gtol |f|`.
    pub gtol: f64,
}

impl Default for LbfgsOptions {
    fn default() -> Self {
        Self { memory: 12, max_iter: 2000, ftol: 1e-12, gtol: 1e-9 }
    }
}

#[derive(Debug, Clone)]
pub struct LbfgsOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn initial_scale(xn: f64) -> f64 {
    if xn > 1e-8 {
        0.01 * xn
    } else {
        1.0
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Limited-memory BFGS with Armijo backtracking. The objective returns `None`
/// at infeasible points, which the line search treats as a rejected step.
pub fn lbfgs<F>(x0: Vec<f64>, f: F, opts: LbfgsOptions) -> LbfgsOutcome
where
    F: FnMut(&[f64]) -> Option<(f64, Vec<f64>)>,
{
    lbfgs_projected(x0, f, |_| {}, opts)
}

/// [`lbfgs`] restricted to a linear subspace. `project` is the orthogonal
/// projector onto it and is applied to the start, every search direction and
/// every accepted iterate, so roundoff cannot leave the subspace.
pub fn lbfgs_projected<F, P>(x0: Vec<f64>, mut f: F, project: P, opts: LbfgsOptions) -> LbfgsOutcome
where
    F: FnMut(&[f64]) -> Option<(f64, Vec<f64>)>,
    P: Fn(&mut [f64]),
{
    let mut x = x0;
    project(&mut x);
    let (mut fx, mut g) = match f(&x) {
        Some(v) => v,
        None => {
            return LbfgsOutcome { x, value: f64::INFINITY, grad_norm: f64::INFINITY, iterations: 0, converged: false }
        }
    };
    let mut s_hist: Vec<Vec<f64>> = Vec::new();
    let mut y_hist: Vec<Vec<f64>> = Vec::new();
    let mut stalls = 0;
    let mut converged = false;
    let mut iter = 0;
    while iter < opts.max_iter {
        let gn = dot(&g, &g).sqrt();
        let xn = dot(&x, &x).sqrt();
        if gn * xn.max(1.0) <= opts.gtol * fx.abs() || gn == 0.0 {
            converged = true;
            break;
        }
        // two-loop recursion
        let mut q = g.clone();
        let k = s_hist.len();
        let mut alphas = vec![0.0; k];
        for i in (0..k).rev() {
            let rho = 1.0 / dot(&y_hist[i], &s_hist[i]);
            alphas[i] = rho * dot(&s_hist[i], &q);
            for (qj, yj) in q.iter_mut().zip(&y_hist[i]) {
                *qj -= alphas[i] * yj;
            }
        }
        let gamma = if k > 0 {
            dot(&s_hist[k - 1], &y_hist[k - 1]) / dot(&y_hist[k - 1], &y_hist[k - 1])
        } else {
            initial_scale(xn) / gn
        };
        for qj in q.iter_mut() {
            *qj *= gamma;
        }
        for i in 0..k {
            let rho = 1.0 / dot(&y_hist[i], &s_hist[i]);
            let beta = rho * dot(&y_hist[i], &q);
            for (qj, sj) in q.iter_mut().zip(&s_hist[i]) {
                *qj += (alphas[i] - beta) * sj;
            }
        }
        let mut dir: Vec<f64> = q.iter().map(|v| -v).collect();
        project(&mut dir);
        let mut slope = dot(&dir, &g);
        if slope >= 0.0 {
            s_hist.clear();
            y_hist.clear();
            let scale = initial_scale(xn) / gn;
            dir = g.iter().map(|v| -v * scale).collect();
            project(&mut dir);
            slope = dot(&dir, &g);
        }
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let mut xt: Vec<f64> = x.iter().zip(&dir).map(|(a, d)| a + step * d).collect();
            project(&mut xt);
            if let Some((ft, gt)) = f(&xt) {
                if ft.is_finite() && ft <= fx + 1e-4 * step * slope {
                    accepted = Some((xt, ft, gt));
                    break;
                }
            }
            step *= 0.5;
        }
        iter += 1;
        let Some((xt, ft, gt)) = accepted else {
            if s_hist.is_empty() {
                converged = true;
                break;
            }
            s_hist.clear();
            y_hist.clear();
            continue;
        };
        let s: Vec<f64> = xt.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gt.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() && sy > 0.0 {
            if s_hist.len() == opts.memory {
                s_hist.remove(0);
                y_hist.remove(0);
            }
            s_hist.push(s);
            y_hist.push(y);
        }
        let decrease = fx - ft;
        x = xt;
        g = gt;
        let prev = fx;
        fx = ft;
        if decrease <= opts.ftol * prev.abs().max(1e-300) {
            stalls += 1;
            if stalls >= 4 {
                converged = true;
                break;
            }
        } else {
            stalls = 0;
        }
    }
    let grad_norm = dot(&g, &g).sqrt();
    LbfgsOutcome { x, value: fx, grad_norm, iterations: iter, converged }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_finds_parabola_min() {
        let (x, _) = golden_section(|x| (x - 0.3).powi(2), -1.0, 2.0, 1e-10);
        assert!((x - 0.3).abs() < 1e-8);
    }

    #[test]
    fn bisect_finds_root() {
        let (x, _) = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-14);
        assert!((x - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn nelder_mead_rosenbrock() {
        let rosen = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let (x, fx) = nelder_mead(rosen, &[-1.2, 1.0], NelderMeadOptions { max_evals: 20000, ..Default::default() });
        assert!(fx < 1e-10, "{fx}");
        assert!((x[0] - 1.0).abs() < 1e-4);
    }

    #[test]
    fn lbfgs_quadratic() {
        let f = |x: &[f64]| {
            let v: f64 = x.iter().enumerate().map(|(i, a)| (i as f64 + 1.0) * (a - 1.0).powi(2)).sum();
            let g = x.iter().enumerate().map(|(i, a)| 2.0 * (i as f64 + 1.0) * (a - 1.0)).collect();
            Some((v + 1.0, g))
        };
        let out = lbfgs(vec![0.0; 10], f, LbfgsOptions::default());
        assert!((out.value - 1.0).abs() < 1e-10, "{:?}", out);
    }
}
