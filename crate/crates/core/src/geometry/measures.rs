//! Width, diameter, inradius and related extremal quantities.

use super::{ConvexBody, Shape};
use crate::linalg::{sphere_grid, tangent_basis};
use crate::lp::max_inscribed_ball;
use crate::optim::{nelder_mead, NelderMeadOptions};
use crate::{Matrix, Vector};
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct Measure {
    pub value: f64,
    pub direction: Vec<f64>,
}

/// `{x : <x, normal> = offset}`.
#[derive(Debug, Clone, Serialize)]
pub struct Hyperplane {
    pub normal: Vec<f64>,
    pub offset: f64,
}

/// Optimise `f` over the unit sphere: a deterministic direction grid followed
/// by Nelder–Mead refinement in tangent coordinates around the best points.
pub fn sphere_optimize<F: Fn(&Vector) -> f64>(dim: usize, count: usize, maximize: bool, f: F) -> (Vector, f64) {
    let sign = if maximize { -1.0 } else { 1.0 };
    let g = |u: &Vector| sign * f(u);
    let grid = sphere_grid(dim, count.max(2), 5);
    let mut scored: Vec<(f64, Vector)> = grid.into_iter().map(|u| (g(&u), u)).collect();
    scored.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut best = scored[0].clone();
    if dim > 1 {
        let spacing = if dim == 2 { std::f64::consts::PI / count as f64 } else { 0.3 };
        for (_, start) in scored.iter().take(3) {
            let basis = tangent_basis(start);
            let at = |t: &[f64]| {
                let mut w = start.clone();
                for (k, tk) in t.iter().enumerate() {
                    w += basis.column(k) * *tk;
                }
                w.normalize()
            };
            let (t, val) = nelder_mead(
                |t| g(&at(t)),
                &vec![0.0; dim - 1],
                NelderMeadOptions { step: spacing, max_evals: 400 * dim, ftol: 1e-15, xtol: 1e-12 },
            );
            if val < best.0 {
                best = (val, at(&t));
            }
        }
    }
    (best.1, sign * best.0)
}

fn sphere_count(dim: usize) -> usize {
    1024 * dim
}

impl ConvexBody {
    /// `min_{|u|=1} h(u) + h(-u)` with a minimising direction.
    pub fn width(&self) -> Measure {
        let f = |u: &Vector| self.support_value(u) + self.support_value(&-u);
        let mut best: Option<(f64, Vector)> = None;
        if let Shape::Polytope(p) = &self.shape {
            for facet in &p.facets {
                let val = f(&facet.normal);
                if best.as_ref().is_none_or(|b| val < b.0 - 1e-15) {
                    best = Some((val, facet.normal.clone()));
                }
            }
            if self.dim <= 2 {
                let (val, u) = best.expect("polytope has facets");
                return Measure { value: val, direction: u.iter().copied().collect() };
            }
        }
        let (u, val) = sphere_optimize(self.dim, sphere_count(self.dim), false, f);
        if best.as_ref().is_none_or(|b| val < b.0) {
            best = Some((val, u));
        }
        let (val, u) = best.expect("width");
        Measure { value: val, direction: u.iter().copied().collect() }
    }

    /// `max_{|u|=1} h(u) + h(-u)`.
    pub fn diameter(&self) -> Measure {
        if let Shape::Polytope(p) = &self.shape {
            let mut best = (0.0, Vector::zeros(self.dim));
            for (i, a) in p.vertices.iter().enumerate() {
                for b in &p.vertices[i + 1..] {
                    let d = (a - b).norm();
                    if d > best.0 {
                        best = (d, (a - b) / d);
                    }
                }
            }
            return Measure { value: best.0, direction: best.1.iter().copied().collect() };
        }
        let f = |u: &Vector| self.support_value(u) + self.support_value(&-u);
        let (u, val) = sphere_optimize(self.dim, sphere_count(self.dim), true, f);
        Measure { value: val, direction: u.iter().copied().collect() }
    }

    /// Radius and center of a largest inscribed ball.
    pub fn inradius(&self) -> (f64, Vector) {
        let d = self.dim;
        let (c, r) = self.deepest_point_in(&Matrix::identity(d, d), &Vector::zeros(d));
        (r, c)
    }

    /// Largest ball centered in the affine subspace `anchor + span(basis)`.
    /// The radius is negative when the subspace misses the interior.
    pub fn deepest_point_in(&self, basis: &Matrix, anchor: &Vector) -> (Vector, f64) {
        let k = basis.ncols();
        match &self.shape {
            Shape::Polytope(p) => {
                let normals: Vec<Vector> = p.facets.iter().map(|f| f.normal.clone()).collect();
                let offsets: Vec<f64> = p.facets.iter().map(|f| f.offset).collect();
                if let Some((x, r)) = max_inscribed_ball(&normals, &offsets, basis, anchor) {
                    return (x, r);
                }
            }
            Shape::Ball { center, radius } => {
                let proj = basis * (basis.transpose() * (center - anchor));
                let x = anchor + proj;
                let r = radius - (center - &x).norm();
                return (x, r);
            }
            _ => {}
        }
        if k == 0 {
            return (anchor.clone(), self.depth_at(anchor));
        }
        // outer polyhedral approximation from sampled support values
        let dirs = sphere_grid(self.dim, 256 * self.dim, 9);
        let offsets: Vec<f64> = dirs.iter().map(|u| self.support_value(u)).collect();
        let start = match max_inscribed_ball(&dirs, &offsets, basis, anchor) {
            Some((x, _)) => basis.transpose() * (x - anchor),
            None => basis.transpose() * (self.reference_point() - anchor),
        };
        let at = |y: &[f64]| anchor + basis * Vector::from_column_slice(y);
        let scale = self.radius.max(1e-12);
        let (y, val) = nelder_mead(
            |y| -self.depth_at(&at(y)),
            start.as_slice(),
            NelderMeadOptions { step: 0.05 * scale, max_evals: 300 * (k + 1), ftol: 1e-13, xtol: 1e-10 * scale },
        );
        (at(&y), -val)
    }

    /// Hyperplane `<x, u> = (h(u) - h(-u)) / 2` midway between the supporting
    /// hyperplanes orthogonal to `u`.
    pub fn midplane(&self, u: &Vector) -> Hyperplane {
        let off = 0.5 * (self.support_value(u) - self.support_value(&-u));
        Hyperplane { normal: u.iter().copied().collect(), offset: off }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_measures() {
        let s = ConvexBody::cube(2, 1.0).unwrap();
        let w = s.width();
        assert!((w.value - 2.0).abs() < 1e-14);
        assert!((w.direction[0].abs() - 1.0).abs() < 1e-14 || (w.direction[1].abs() - 1.0).abs() < 1e-14);
        assert!((s.diameter().value - 8f64.sqrt()).abs() < 1e-14);
        let (r, c) = s.inradius();
        assert!((r - 1.0).abs() < 1e-9 && c.norm() < 1e-9);
    }

    #[test]
    fn ball_measures() {
        let b = ConvexBody::ball(Vector::from_vec(vec![0.3, -0.2, 0.1]), 1.5).unwrap();
        assert!((b.width().value - 3.0).abs() < 1e-9);
        assert!((b.diameter().value - 3.0).abs() < 1e-9);
        assert!((b.inradius().0 - 1.5).abs() < 1e-12);
    }

    #[test]
    fn ellipse_inradius_and_width() {
        let e = ConvexBody::ellipsoid_axes(&[2.0, 0.5]).unwrap();
        assert!((e.width().value - 1.0).abs() < 1e-8);
        assert!((e.diameter().value - 4.0).abs() < 1e-8);
        assert!((e.inradius().0 - 0.5).abs() < 1e-6);
    }

    #[test]
    fn midplane_of_shifted_square() {
        let s = ConvexBody::boxed(&[0.0, -1.0], &[2.0, 1.0]).unwrap();
        let h = s.midplane(&Vector::from_vec(vec![1.0, 0.0]));
        assert!((h.offset - 1.0).abs() < 1e-14);
    }
}
