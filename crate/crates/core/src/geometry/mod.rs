//! Convex bodies as composable oracle bundles: gauge, support function,
//! support points and normal cones.

pub mod measures;
pub mod polytope;
pub mod spec;

pub use measures::{Hyperplane, Measure};
pub use polytope::{Facet, Polytope};
pub use spec::BodySpec;

use crate::error::{Error, Result};
use crate::linalg::{sphere_grid, tangent_basis};
use crate::optim::{nelder_mead, NelderMeadOptions};
use crate::{Matrix, Vector};

#[derive(Debug, Clone)]
pub enum Shape {
    Ball { center: Vector, radius: f64 },
    /// `{x : (x-c)^T Q (x-c) <= 1}`.
    Ellipsoid { center: Vector, q: Matrix, q_inv: Matrix },
    Polytope(Polytope),
    /// Firey p-sum: support `(h_L^p + h_R^p)^{1/p}`; `p = 1` is the Minkowski sum.
    PSum { left: Box<ConvexBody>, right: Box<ConvexBody>, p: f64 },
    Product { left: Box<ConvexBody>, right: Box<ConvexBody> },
    Translate { body: Box<ConvexBody>, by: Vector },
    /// Image `M K`.
    Linear { body: Box<ConvexBody>, matrix: Matrix, inverse: Matrix },
    Polar(Box<ConvexBody>),
}

#[derive(Debug, Clone)]
pub struct ConvexBody {
    dim: usize,
    shape: Shape,
    smooth: bool,
    origin_interior: bool,
    radius: f64,
}

fn check_dim(v: &Vector, dim: usize) -> Result<()> {
    if v.len() != dim {
        return Err(Error::DimensionMismatch { expected: dim, found: v.len() });
    }
    Ok(())
}

fn split(w: &Vector, k: usize) -> (Vector, Vector) {
    (w.rows(0, k).into_owned(), w.rows(k, w.len() - k).into_owned())
}

fn concat(a: &Vector, b: &Vector) -> Vector {
    Vector::from_iterator(a.len() + b.len(), a.iter().chain(b.iter()).copied())
}

/// Smooth upper bound `(sum (a_i^+)^s)^{1/s}` of `max(max_i a_i, 0)` and its
/// weights `(a_i^+ / value)^{s-1}`.
fn soft_max_positive(a: &[f64], s: f64) -> (f64, Vec<f64>) {
    let m = a.iter().copied().fold(0.0, f64::max);
    if m <= 0.0 {
        return (0.0, vec![0.0; a.len()]);
    }
    let sum: f64 = a.iter().map(|&x| (x.max(0.0) / m).powf(s)).sum();
    let value = m * sum.powf(1.0 / s);
    let weights = a.iter().map(|&x| (x.max(0.0) / value).powf(s - 1.0)).collect();
    (value, weights)
}

impl ConvexBody {
    fn make(dim: usize, shape: Shape) -> Self {
        let mut body = ConvexBody { dim, shape, smooth: false, origin_interior: false, radius: 1.0 };
        body.smooth = match &body.shape {
            Shape::Ball { .. } | Shape::Ellipsoid { .. } => true,
            Shape::Polytope(_) | Shape::Product { .. } => false,
            Shape::PSum { left, right, .. } => left.smooth && right.smooth,
            Shape::Translate { body, .. } | Shape::Linear { body, .. } => body.smooth,
            Shape::Polar(inner) => matches!(inner.shape, Shape::Ball { .. } | Shape::Ellipsoid { .. }),
        };
        body.radius = match &body.shape {
            Shape::Ball { center, radius } => center.norm() + radius,
            Shape::Ellipsoid { center, q_inv, .. } => {
                center.norm() + q_inv.symmetric_eigenvalues().iter().fold(0.0f64, |a, &b| a.max(b)).sqrt()
            }
            Shape::Polytope(p) => p.vertices.iter().map(|v| v.norm()).fold(0.0, f64::max),
            Shape::PSum { left, right, p } => (left.radius.powf(*p) + right.radius.powf(*p)).powf(1.0 / p),
            Shape::Product { left, right } => left.radius.hypot(right.radius),
            Shape::Translate { body, by } => body.radius + by.norm(),
            Shape::Linear { body, matrix, .. } => body.radius * matrix.norm(),
            Shape::Polar(inner) => {
                let d = inner.depth_at(&Vector::zeros(dim));
                1.05 / d.max(1e-300)
            }
        };
        let tol = 1e-9 * body.radius.max(1e-300);
        body.origin_interior = match &body.shape {
            Shape::Ball { center, radius } => center.norm() < radius - tol,
            Shape::Ellipsoid { center, q, .. } => center.dot(&(q * center)) < 1.0 - 1e-12,
            Shape::Polytope(p) => p.facets.iter().all(|f| f.offset > tol),
            Shape::Product { left, right } => left.origin_interior && right.origin_interior,
            Shape::Linear { body, .. } => body.origin_interior,
            Shape::Polar(_) => true,
            Shape::PSum { left, right, p } if *p > 1.0 => left.origin_interior && right.origin_interior,
            _ => body.depth_at(&Vector::zeros(dim)) > tol,
        };
        body
    }

    pub fn ball(center: Vector, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidBody(format!("ball radius {radius}")));
        }
        if center.is_empty() {
            return Err(Error::InvalidBody("zero-dimensional ball".into()));
        }
        Ok(Self::make(center.len(), Shape::Ball { center, radius }))
    }

    pub fn unit_ball(dim: usize) -> Self {
        Self::ball(Vector::zeros(dim), 1.0).expect("unit ball")
    }

    /// Ellipsoid `{x : (x-c)^T Q (x-c) <= 1}` for positive definite `Q`.
    pub fn ellipsoid(q: Matrix, center: Vector) -> Result<Self> {
        check_dim(&center, q.nrows())?;
        if q.nrows() != q.ncols() || (&q - q.transpose()).amax() > 1e-12 * q.amax() {
            return Err(Error::InvalidBody("ellipsoid matrix must be symmetric".into()));
        }
        let chol = q.clone().cholesky().ok_or_else(|| Error::InvalidBody("ellipsoid matrix must be positive definite".into()))?;
        let q_inv = chol.inverse();
        Ok(Self::make(center.len(), Shape::Ellipsoid { center, q, q_inv }))
    }

    /// Axis-aligned ellipsoid with the given semi-axes.
    pub fn ellipsoid_axes(semi_axes: &[f64]) -> Result<Self> {
        let q = Matrix::from_diagonal(&Vector::from_iterator(semi_axes.len(), semi_axes.iter().map(|a| 1.0 / (a * a))));
        Self::ellipsoid(q, Vector::zeros(semi_axes.len()))
    }

    pub fn polytope(vertices: &[Vector]) -> Result<Self> {
        Ok(Self::from_polytope(Polytope::from_points(vertices)?))
    }

    pub fn from_polytope(p: Polytope) -> Self {
        Self::make(p.dim, Shape::Polytope(p))
    }

    /// Axis-aligned box `[lo, hi]`.
    pub fn boxed(lo: &[f64], hi: &[f64]) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(Error::InvalidBody("box bounds must have equal nonzero length".into()));
        }
        if lo.iter().zip(hi).any(|(a, b)| !(a < b)) {
            return Err(Error::InvalidBody("box must have lo < hi".into()));
        }
        let d = lo.len();
        let pts: Vec<Vector> = (0..1usize << d)
            .map(|mask| Vector::from_iterator(d, (0..d).map(|i| if mask >> i & 1 == 1 { hi[i] } else { lo[i] })))
            .collect();
        Self::polytope(&pts)
    }

    /// Cube `[-a, a]^d`.
    pub fn cube(dim: usize, a: f64) -> Result<Self> {
        Self::boxed(&vec![-a; dim], &vec![a; dim])
    }

    pub fn psum(left: ConvexBody, right: ConvexBody, p: f64) -> Result<Self> {
        if !(p >= 1.0) || !p.is_finite() {
            return Err(Error::InvalidExponent(p));
        }
        if left.dim != right.dim {
            return Err(Error::DimensionMismatch { expected: left.dim, found: right.dim });
        }
        if p > 1.0 && !(left.origin_interior && right.origin_interior) {
            return Err(Error::BodyWithoutInteriorOrigin);
        }
        let dim = left.dim;
        Ok(Self::make(dim, Shape::PSum { left: Box::new(left), right: Box::new(right), p }))
    }

    pub fn minkowski_sum(left: ConvexBody, right: ConvexBody) -> Result<Self> {
        Self::psum(left, right, 1.0)
    }

    pub fn product(left: ConvexBody, right: ConvexBody) -> Self {
        let dim = left.dim + right.dim;
        Self::make(dim, Shape::Product { left: Box::new(left), right: Box::new(right) })
    }

    pub fn translate(self, by: &Vector) -> Result<Self> {
        check_dim(by, self.dim)?;
        if by.amax() == 0.0 {
            return Ok(self);
        }
        let dim = self.dim;
        Ok(match self.shape {
            Shape::Ball { center, radius } => Self::make(dim, Shape::Ball { center: center + by, radius }),
            Shape::Ellipsoid { center, q, q_inv } => Self::make(dim, Shape::Ellipsoid { center: center + by, q, q_inv }),
            Shape::Polytope(p) => Self::from_polytope(p.translated(by)),
            Shape::Translate { body, by: t } => body.translate(&(t + by))?,
            Shape::Product { left, right } => {
                let (a, b) = split(by, left.dim);
                Self::product(left.translate(&a)?, right.translate(&b)?)
            }
            Shape::PSum { left, right, p } if p == 1.0 => Self::psum(left.translate(by)?, *right, 1.0)?,
            Shape::Linear { body, matrix, inverse } => {
                let inner = body.translate(&(&inverse * by))?;
                Self::make(dim, Shape::Linear { body: Box::new(inner), matrix, inverse })
            }
            shape => Self::make(dim, Shape::Translate { body: Box::new(Self::make(dim, shape)), by: by.clone() }),
        })
    }

    /// Image `M K` under an invertible matrix.
    pub fn linear(self, m: &Matrix) -> Result<Self> {
        if m.nrows() != self.dim || m.ncols() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: m.nrows() });
        }
        let inverse = m.clone().try_inverse().ok_or(Error::SingularMatrix)?;
        if !inverse.iter().all(|v| v.is_finite()) {
            return Err(Error::SingularMatrix);
        }
        let dim = self.dim;
        Ok(match self.shape {
            Shape::Ball { center, radius } => {
                let q = inverse.transpose() * &inverse / (radius * radius);
                let q = (&q + q.transpose()) * 0.5;
                Self::ellipsoid(q, m * center)?
            }
            Shape::Ellipsoid { center, q, .. } => {
                let q = inverse.transpose() * q * &inverse;
                let q = (&q + q.transpose()) * 0.5;
                Self::ellipsoid(q, m * center)?
            }
            Shape::Polytope(p) => {
                let pts: Vec<Vector> = p.vertices.iter().map(|v| m * v).collect();
                Self::polytope(&pts)?
            }
            Shape::Linear { body, matrix, .. } => body.linear(&(m * matrix))?,
            Shape::Translate { body, by } => body.linear(m)?.translate(&(m * by))?,
            shape => Self::make(dim, Shape::Linear { body: Box::new(Self::make(dim, shape)), matrix: m.clone(), inverse }),
        })
    }

    pub fn scaled(self, alpha: f64) -> Result<Self> {
        let d = self.dim;
        self.linear(&(Matrix::identity(d, d) * alpha))
    }

    pub fn polar(self) -> Result<Self> {
        if !self.origin_interior {
            return Err(Error::BodyWithoutInteriorOrigin);
        }
        let dim = self.dim;
        Ok(match self.shape {
            Shape::Ball { center, radius } if center.amax() == 0.0 => Self::ball(center, 1.0 / radius)?,
            Shape::Ellipsoid { center, q, q_inv } if center.amax() == 0.0 => {
                Self::make(dim, Shape::Ellipsoid { center, q: q_inv, q_inv: q })
            }
            Shape::Polytope(p) => {
                let pts: Vec<Vector> = p.facets.iter().map(|f| &f.normal / f.offset).collect();
                Self::polytope(&pts)?
            }
            Shape::Polar(inner) => *inner,
            Shape::Linear { body, matrix, inverse } => body.polar()?.linear(&inverse.transpose()).inspect(|_b| {
                let _ = matrix;
            })?,
            shape => Self::make(dim, Shape::Polar(Box::new(Self::make(dim, shape)))),
        })
    }

    /// Intersection of two polytopes, materialised through halfspace enumeration.
    pub fn intersection(&self, other: &ConvexBody) -> Result<Self> {
        let (Some(a), Some(b)) = (self.as_polytope(), other.as_polytope()) else {
            return Err(Error::InvalidBody("intersection is supported for polytopes only".into()));
        };
        if a.dim != b.dim {
            return Err(Error::DimensionMismatch { expected: a.dim, found: b.dim });
        }
        let normals: Vec<Vector> = a.facets.iter().chain(&b.facets).map(|f| f.normal.clone()).collect();
        let offsets: Vec<f64> = a.facets.iter().chain(&b.facets).map(|f| f.offset).collect();
        Ok(Self::from_polytope(Polytope::from_halfspaces(&normals, &offsets)?))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn is_smooth(&self) -> bool {
        self.smooth
    }

    pub fn origin_interior(&self) -> bool {
        self.origin_interior
    }

    /// Upper bound on `max |x|` over the body.
    pub fn circumradius_bound(&self) -> f64 {
        self.radius
    }

    pub fn as_polytope(&self) -> Option<&Polytope> {
        match &self.shape {
            Shape::Polytope(p) => Some(p),
            _ => None,
        }
    }

    pub fn is_centrally_symmetric(&self) -> bool {
        let dirs = sphere_grid(self.dim, 64 * self.dim, 11);
        dirs.iter().all(|u| {
            let a = self.support_raw(u).0;
            let b = self.support_raw(&-u).0;
            (a - b).abs() <= 1e-9 * self.radius
        })
    }

    /// An interior point used as the reference for smoothing and membership.
    pub fn reference_point(&self) -> Vector {
        match &self.shape {
            Shape::Ball { center, .. } | Shape::Ellipsoid { center, .. } => center.clone(),
            Shape::Polytope(p) => p.centroid.clone(),
            Shape::PSum { left, right, p } => {
                if *p == 1.0 {
                    left.reference_point() + right.reference_point()
                } else {
                    Vector::zeros(self.dim)
                }
            }
            Shape::Product { left, right } => concat(&left.reference_point(), &right.reference_point()),
            Shape::Translate { body, by } => body.reference_point() + by,
            Shape::Linear { body, matrix, .. } => matrix * body.reference_point(),
            Shape::Polar(_) => Vector::zeros(self.dim),
        }
    }

    /// Minkowski functional `j_K(z)`.
    pub fn gauge(&self, z: &Vector) -> Result<f64> {
        check_dim(z, self.dim)?;
        if !self.origin_interior {
            return Err(Error::BodyWithoutInteriorOrigin);
        }
        Ok(self.gauge_about(&Vector::zeros(self.dim), z))
    }

    /// Gauge of `K - c` at `z` for an interior point `c`.
    pub fn gauge_about(&self, c: &Vector, z: &Vector) -> f64 {
        if z.amax() == 0.0 {
            return 0.0;
        }
        match &self.shape {
            Shape::Ball { center, radius } => {
                let d = c - center;
                quadratic_gauge(d.dot(z), z.norm_squared(), radius * radius - d.norm_squared())
            }
            Shape::Ellipsoid { center, q, .. } => {
                let d = c - center;
                let qz = q * z;
                quadratic_gauge(d.dot(&qz), z.dot(&qz), 1.0 - d.dot(&(q * &d)))
            }
            Shape::Polytope(p) => p.gauge_about(c, z),
            Shape::Product { left, right } => {
                let k = left.dim;
                let (c1, c2) = split(c, k);
                let (z1, z2) = split(z, k);
                left.gauge_about(&c1, &z1).max(right.gauge_about(&c2, &z2))
            }
            Shape::Translate { body, by } => body.gauge_about(&(c - by), z),
            Shape::Linear { body, inverse, .. } => body.gauge_about(&(inverse * c), &(inverse * z)),
            Shape::Polar(inner) if c.amax() == 0.0 => inner.support_raw(z).0,
            _ => self.generic_gauge_about(c, z).0,
        }
    }

    /// `max_w <z, w> / (h(w) - <c, w>)` over unit `w`, with the maximiser.
    fn generic_gauge_about(&self, c: &Vector, z: &Vector) -> (f64, Vector) {
        let phi = |w: &Vector| {
            let den = self.support_raw(w).0 - c.dot(w);
            z.dot(w) / den.max(1e-300)
        };
        let mut best = z.normalize();
        let mut best_val = phi(&best);
        for w in sphere_grid(self.dim, 64 * self.dim, 3) {
            let v = phi(&w);
            if v > best_val {
                best_val = v;
                best = w;
            }
        }
        if self.dim > 1 {
            for step in [0.05, 0.002] {
                let basis = tangent_basis(&best);
                let at = |t: &[f64]| {
                    let mut w = best.clone();
                    for (k, tk) in t.iter().enumerate() {
                        w += basis.column(k) * *tk;
                    }
                    w.normalize()
                };
                let (t, _) = nelder_mead(
                    |t| -phi(&at(t)),
                    &vec![0.0; self.dim - 1],
                    NelderMeadOptions { step, max_evals: 600 * self.dim, ftol: 1e-16, xtol: 1e-11 },
                );
                let w = at(&t);
                let v = phi(&w);
                if v >= best_val {
                    best_val = v;
                    best = w;
                }
            }
        }
        (best_val.max(0.0), best)
    }

    /// `h_K(w)` and a maximising point of `K`.
    pub fn support(&self, w: &Vector) -> Result<(f64, Vector)> {
        check_dim(w, self.dim)?;
        if w.amax() == 0.0 {
            return Err(Error::ZeroDirection);
        }
        Ok(self.support_raw(w))
    }

    pub fn support_value(&self, w: &Vector) -> f64 {
        if w.amax() == 0.0 {
            return 0.0;
        }
        self.support_raw(w).0
    }

    pub(crate) fn support_raw(&self, w: &Vector) -> (f64, Vector) {
        match &self.shape {
            Shape::Ball { center, radius } => {
                let n = w.norm();
                let point = if n > 0.0 { center + w * (radius / n) } else { center.clone() };
                (center.dot(w) + radius * n, point)
            }
            Shape::Ellipsoid { center, q_inv, .. } => {
                let qw = q_inv * w;
                let s = w.dot(&qw).max(0.0).sqrt();
                let point = if s > 0.0 { center + qw / s } else { center.clone() };
                (center.dot(w) + s, point)
            }
            Shape::Polytope(p) => p.support(w),
            Shape::PSum { left, right, p } => {
                let (hl, xl) = left.support_raw(w);
                let (hr, xr) = right.support_raw(w);
                if *p == 1.0 {
                    return (hl + hr, xl + xr);
                }
                let (hl, hr) = (hl.max(0.0), hr.max(0.0));
                let h = (hl.powf(*p) + hr.powf(*p)).powf(1.0 / p);
                if h <= 0.0 {
                    return (0.0, Vector::zeros(self.dim));
                }
                let a = (hl / h).powf(p - 1.0);
                let b = (hr / h).powf(p - 1.0);
                (h, xl * a + xr * b)
            }
            Shape::Product { left, right } => {
                let (w1, w2) = split(w, left.dim);
                let (h1, x1) = left.support_raw(&w1);
                let (h2, x2) = right.support_raw(&w2);
                (h1 + h2, concat(&x1, &x2))
            }
            Shape::Translate { body, by } => {
                let (h, x) = body.support_raw(w);
                (h + by.dot(w), x + by)
            }
            Shape::Linear { body, matrix, .. } => {
                let (h, x) = body.support_raw(&(matrix.transpose() * w));
                (h, matrix * x)
            }
            Shape::Polar(inner) => {
                let h = inner.gauge_about(&Vector::zeros(self.dim), w);
                let point = if h > 0.0 { inner.gauge_gradient_unchecked(w) } else { Vector::zeros(self.dim) };
                (h, point)
            }
        }
    }

    /// Smoothed support function and gradient. `None` is the exact support
    /// function; `Some(s)` replaces every nonsmooth maximum by an `l^s`
    /// softening (and product kinks by an `eta = 1/s` regularisation). The
    /// result is convex, 1-homogeneous and bounds `h_K` from above.
    pub fn support_smooth(&self, w: &Vector, s: Option<f64>) -> (f64, Vector) {
        match s {
            None => self.support_raw(w),
            Some(s) => {
                let c = self.reference_point();
                let (v, g) = self.centered_smooth(w, s);
                (v + c.dot(w), g + c)
            }
        }
    }

    /// Smoothed support of `K - reference_point()`.
    fn centered_smooth(&self, w: &Vector, s: f64) -> (f64, Vector) {
        match &self.shape {
            Shape::Ball { radius, .. } => {
                let n = w.norm();
                let g = if n > 0.0 { w * (radius / n) } else { Vector::zeros(self.dim) };
                (radius * n, g)
            }
            Shape::Ellipsoid { q_inv, .. } => {
                let qw = q_inv * w;
                let v = w.dot(&qw).max(0.0).sqrt();
                let g = if v > 0.0 { qw / v } else { Vector::zeros(self.dim) };
                (v, g)
            }
            Shape::Polytope(p) => {
                let rel: Vec<Vector> = p.vertices.iter().map(|v| v - &p.centroid).collect();
                let a: Vec<f64> = rel.iter().map(|v| v.dot(w)).collect();
                let (value, weights) = soft_max_positive(&a, s);
                let mut g = Vector::zeros(self.dim);
                for (v, wt) in rel.iter().zip(weights) {
                    if wt > 0.0 {
                        g += v * wt;
                    }
                }
                (value, g)
            }
            Shape::PSum { left, right, p } => {
                if *p == 1.0 {
                    let (a, ga) = left.centered_smooth(w, s);
                    let (b, gb) = right.centered_smooth(w, s);
                    return (a + b, ga + gb);
                }
                let (hl, gl) = left.support_smooth(w, Some(s));
                let (hr, gr) = right.support_smooth(w, Some(s));
                let (hl, hr) = (hl.max(0.0), hr.max(0.0));
                let h = (hl.powf(*p) + hr.powf(*p)).powf(1.0 / p);
                if h <= 0.0 {
                    return (0.0, Vector::zeros(self.dim));
                }
                (h, gl * (hl / h).powf(p - 1.0) + gr * (hr / h).powf(p - 1.0))
            }
            Shape::Product { left, right } => {
                let eta = 1.0 / s;
                let (w1, w2) = split(w, left.dim);
                let (f, gf) = left.centered_smooth(&w1, s);
                let (g, gg) = right.centered_smooth(&w2, s);
                let s1 = (f * f + eta * eta * w2.norm_squared()).sqrt();
                let s2 = (g * g + eta * eta * w1.norm_squared()).sqrt();
                let mut d1 = Vector::zeros(w1.len());
                let mut d2 = Vector::zeros(w2.len());
                if s1 > 0.0 {
                    d1 += gf * (f / s1);
                    d2 += &w2 * (eta * eta / s1);
                }
                if s2 > 0.0 {
                    d2 += gg * (g / s2);
                    d1 += &w1 * (eta * eta / s2);
                }
                (s1 + s2, concat(&d1, &d2))
            }
            Shape::Translate { body, .. } => body.centered_smooth(w, s),
            Shape::Linear { body, matrix, .. } => {
                let (v, g) = body.centered_smooth(&(matrix.transpose() * w), s);
                (v, matrix * g)
            }
            Shape::Polar(inner) => match &inner.shape {
                Shape::Polytope(p) => {
                    let a: Vec<f64> = p.facets.iter().map(|f| f.normal.dot(w) / f.offset).collect();
                    let (value, weights) = soft_max_positive(&a, s);
                    let mut g = Vector::zeros(self.dim);
                    for (f, wt) in p.facets.iter().zip(weights) {
                        if wt > 0.0 {
                            g += &f.normal * (wt / f.offset);
                        }
                    }
                    (value, g)
                }
                Shape::Product { left, right } => {
                    let (w1, w2) = split(w, left.dim);
                    let z1 = Vector::zeros(w1.len());
                    let z2 = Vector::zeros(w2.len());
                    let a = [left.gauge_about(&z1, &w1), right.gauge_about(&z2, &w2)];
                    let (value, weights) = soft_max_positive(&a, s);
                    let g1 = if a[0] > 0.0 { left.gauge_gradient_unchecked(&w1) * weights[0] } else { z1 };
                    let g2 = if a[1] > 0.0 { right.gauge_gradient_unchecked(&w2) * weights[1] } else { z2 };
                    (value, concat(&g1, &g2))
                }
                _ => self.support_raw(w),
            },
        }
    }

    /// Unit generators of the normal cone at a boundary point `y`.
    pub fn normal_cone(&self, y: &Vector) -> Vec<Vector> {
        let tol = 1e-7 * self.radius.max(1.0);
        match &self.shape {
            Shape::Ball { center, .. } => vec![(y - center).normalize()],
            Shape::Ellipsoid { center, q, .. } => vec![(q * (y - center)).normalize()],
            Shape::Polytope(p) => p.active_facets(y, tol).into_iter().map(|f| f.normal.clone()).collect(),
            Shape::Product { left, right } => {
                let k = left.dim;
                let (y1, y2) = split(y, k);
                let c1 = left.reference_point();
                let c2 = right.reference_point();
                let j1 = left.gauge_about(&c1, &(&y1 - &c1));
                let j2 = right.gauge_about(&c2, &(&y2 - &c2));
                let jm = j1.max(j2);
                let mut out = Vec::new();
                if j1 >= jm - 1e-7 {
                    out.extend(left.normal_cone(&y1).iter().map(|n| concat(n, &Vector::zeros(y2.len()))));
                }
                if j2 >= jm - 1e-7 {
                    out.extend(right.normal_cone(&y2).iter().map(|n| concat(&Vector::zeros(y1.len()), n)));
                }
                out
            }
            Shape::Translate { body, by } => body.normal_cone(&(y - by)),
            Shape::Linear { body, inverse, .. } => body
                .normal_cone(&(inverse * y))
                .iter()
                .map(|n| (inverse.transpose() * n).normalize())
                .collect(),
            Shape::Polar(inner) => match &inner.shape {
                Shape::Polytope(p) => {
                    let vals: Vec<f64> = p.vertices.iter().map(|v| v.dot(y)).collect();
                    let best = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                    p.vertices
                        .iter()
                        .zip(&vals)
                        .filter(|(_, &s)| s >= best - tol)
                        .map(|(v, _)| v.normalize())
                        .collect()
                }
                _ => vec![inner.support_raw(y).1.normalize()],
            },
            Shape::PSum { .. } => {
                let c = self.reference_point();
                vec![self.generic_gauge_about(&c, &(y - &c)).1]
            }
        }
    }

    /// Averaged unit outward normal at a boundary point.
    pub fn normal(&self, y: &Vector) -> Vector {
        let cone = self.normal_cone(y);
        let sum = cone.iter().fold(Vector::zeros(self.dim), |a, n| a + n);
        sum.normalize()
    }

    /// Gradient of the gauge at `z != 0` (averaged subgradient at kinks).
    pub fn gauge_gradient(&self, z: &Vector) -> Result<Vector> {
        check_dim(z, self.dim)?;
        if !self.origin_interior {
            return Err(Error::BodyWithoutInteriorOrigin);
        }
        if z.amax() == 0.0 {
            return Err(Error::ZeroDirection);
        }
        Ok(self.gauge_gradient_unchecked(z))
    }

    fn gauge_gradient_unchecked(&self, z: &Vector) -> Vector {
        let j = self.gauge_about(&Vector::zeros(self.dim), z);
        let y = z / j;
        let n = self.normal(&y);
        &n / n.dot(&y)
    }

    /// `min_{|u|=1} h(u) - <x, u>`: distance to the boundary for interior `x`,
    /// negative outside.
    pub fn depth_at(&self, x: &Vector) -> f64 {
        match &self.shape {
            Shape::Ball { center, radius } => radius - (x - center).norm(),
            Shape::Polytope(p) => p.facets.iter().map(|f| f.offset - f.normal.dot(x)).fold(f64::INFINITY, f64::min),
            _ => measures::sphere_optimize(self.dim, 256 * self.dim, false, |u| self.support_raw(u).0 - x.dot(u)).1,
        }
    }

    /// Polar body support check `h_K(w) = j_{K°}(w)` and other identities
    /// depend on this: `H*(w) = h(w)^2 / 4`.
    pub fn legendre_h_star(&self, w: &Vector) -> f64 {
        let h = self.support_value(w);
        h * h / 4.0
    }

    /// Legendre transform `(1/q) h(w)^q` of `j^p / p`, `q = p / (p - 1)`.
    pub fn legendre_gauge_power(&self, w: &Vector, p: f64) -> Result<f64> {
        if !(p > 1.0) || !p.is_finite() {
            return Err(Error::InvalidExponent(p));
        }
        let q = p / (p - 1.0);
        Ok(self.support_value(w).max(0.0).powf(q) / q)
    }
}

/// Positive root `lambda` of `lambda^2 a - 2 lambda b - zz = 0`, written for
/// the gauge of a quadric: `b = <d, z>`, `zz = |z|^2`, `a = r^2 - |d|^2`.
fn quadratic_gauge(b: f64, zz: f64, a: f64) -> f64 {
    let disc = (b * b + zz * a).max(0.0).sqrt();
    if b >= 0.0 {
        (b + disc) / a
    } else {
        zz / (disc - b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &[f64]) -> Vector {
        Vector::from_vec(x.to_vec())
    }

    #[test]
    fn ball_gauge_and_support() {
        let b = ConvexBody::unit_ball(2);
        assert!((b.gauge(&v(&[3., 4.])).unwrap() - 5.0).abs() < 1e-14);
        let (h, x) = b.support(&v(&[0., 2.])).unwrap();
        assert!((h - 2.0).abs() < 1e-14 && (x - v(&[0., 1.])).norm() < 1e-14);
        assert_eq!(b.support(&v(&[0., 0.])), Err(Error::ZeroDirection));
    }

    #[test]
    fn offcenter_ball_gauge() {
        let b = ConvexBody::ball(v(&[0.5, 0.0]), 1.0).unwrap();
        assert!((b.gauge(&v(&[1.5, 0.])).unwrap() - 1.0).abs() < 1e-14);
        assert!((b.gauge(&v(&[-0.5, 0.])).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn square_examples() {
        let s = ConvexBody::cube(2, 1.0).unwrap();
        assert!((s.gauge(&v(&[0.5, -2.])).unwrap() - 2.0).abs() < 1e-14);
        let (h, x) = s.support(&v(&[1., 1.])).unwrap();
        assert!((h - 2.0).abs() < 1e-14 && (x - v(&[1., 1.])).norm() < 1e-14);
        assert!((s.legendre_h_star(&v(&[1., 1.])) - 1.0).abs() < 1e-14);
        assert!((s.legendre_gauge_power(&v(&[1., 0.]), 3.0).unwrap() - 2.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn psum_examples() {
        let b = ConvexBody::psum(ConvexBody::unit_ball(2), ConvexBody::unit_ball(2), 1.0).unwrap();
        assert!((b.gauge(&v(&[2., 0.])).unwrap() - 1.0).abs() < 1e-8);
        let q = ConvexBody::psum(ConvexBody::unit_ball(2), ConvexBody::cube(2, 1.0).unwrap(), 2.0).unwrap();
        assert!((q.support(&v(&[1., 0.])).unwrap().0 - 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn polar_square_is_cross_polytope() {
        let s = ConvexBody::cube(2, 1.0).unwrap().polar().unwrap();
        let p = s.as_polytope().unwrap();
        assert_eq!(p.vertices.len(), 4);
        for vtx in &p.vertices {
            assert!((vtx.norm() - 1.0).abs() < 1e-14);
            assert!(vtx[0].abs() < 1e-14 || vtx[1].abs() < 1e-14);
        }
    }

    #[test]
    fn legendre_ball() {
        let b = ConvexBody::unit_ball(2);
        assert!((b.legendre_h_star(&v(&[2., 0.])) - 1.0).abs() < 1e-14);
        assert_eq!(b.legendre_h_star(&v(&[0., 0.])), 0.0);
        assert!((b.legendre_gauge_power(&v(&[2., 0.]), 2.0).unwrap() - 2.0).abs() < 1e-14);
        assert!(matches!(b.legendre_gauge_power(&v(&[2., 0.]), 1.0), Err(Error::InvalidExponent(_))));
    }

    #[test]
    fn product_gauge_is_max() {
        let p = ConvexBody::product(ConvexBody::unit_ball(2), ConvexBody::cube(2, 2.0).unwrap());
        let z = v(&[0.3, 0.4, 1.0, -3.0]);
        assert!((p.gauge(&z).unwrap() - 1.5).abs() < 1e-14);
    }

    #[test]
    fn smoothing_bounds_exact_support() {
        let bodies = vec![
            ConvexBody::cube(2, 1.0).unwrap(),
            ConvexBody::product(ConvexBody::cube(1, 1.0).unwrap(), ConvexBody::cube(1, 1.0).unwrap()),
            ConvexBody::product(ConvexBody::unit_ball(2), ConvexBody::unit_ball(2)),
        ];
        for b in &bodies {
            for u in sphere_grid(b.dim(), 50, 1) {
                let exact = b.support_raw(&u).0;
                let (s64, _) = b.support_smooth(&u, Some(64.0));
                let (s1k, _) = b.support_smooth(&u, Some(1024.0));
                assert!(s64 >= exact - 1e-12 && s1k >= exact - 1e-12);
                assert!(s1k - exact < 0.02 * exact.abs().max(1.0));
            }
        }
    }

    #[test]
    fn smoothed_gradient_matches_finite_difference() {
        let b = ConvexBody::product(ConvexBody::cube(2, 1.0).unwrap().translate(&v(&[0.2, 0.1])).unwrap(), ConvexBody::unit_ball(2));
        let w = v(&[0.3, -0.7, 0.2, 0.5]);
        let (_, g) = b.support_smooth(&w, Some(16.0));
        for i in 0..4 {
            let mut e = Vector::zeros(4);
            e[i] = 1e-6;
            let fd = (b.support_smooth(&(&w + &e), Some(16.0)).0 - b.support_smooth(&(&w - &e), Some(16.0)).0) / 2e-6;
            assert!((fd - g[i]).abs() < 1e-6, "{i}: {fd} vs {}", g[i]);
        }
    }
}
