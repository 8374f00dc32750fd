//! Linear symplectic maps, their fixed subspaces and the rotation invariant
//! `t(Psi)`: the smallest `s in (0, 2pi]` with `det(Psi - e^{sJ}) = 0`.

use crate::error::{Error, Result};
use crate::linalg::{block_diag, exp_sj, gaussian_matrix, inf_norm, j_matrix, min_singular_value, null_space, orth_complement, pinv};
use crate::optim::{bisect, golden_section};
use crate::{Matrix, Vector};
use serde::Serialize;
use std::f64::consts::PI;

const GRID: usize = 4096;

#[derive(Debug, Clone)]
pub struct SymplecticMap {
    n: usize,
    matrix: Matrix,
    e1_basis: Matrix,
    e1_perp_basis: Matrix,
    /// Basis of `ker(Psi^T - I)`, the orthogonal complement of `range(Psi - I)`.
    cokernel_basis: Matrix,
    /// `(Psi - I)^+`.
    shift_pinv: Matrix,
}

#[derive(Debug, Clone, Serialize)]
pub struct RefinementStep {
    pub method: &'static str,
    pub bracket: [f64; 2],
    pub root: f64,
    pub residual: f64,
    pub accepted: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct TPsi {
    pub value: f64,
    pub trace: Vec<RefinementStep>,
}

/// `max |Psi^T J Psi - J|`.
pub fn symplectic_violation(m: &Matrix) -> f64 {
    let n = m.nrows() / 2;
    let j = j_matrix(n);
    inf_norm(&(m.transpose() * &j * m - j))
}

impl SymplecticMap {
    pub fn new(matrix: Matrix) -> Result<Self> {
        let d = matrix.nrows();
        if d != matrix.ncols() || !d.is_multiple_of(2) || d == 0 {
            return Err(Error::DimensionMismatch { expected: 2 * (d / 2).max(1), found: matrix.ncols() });
        }
        let violation = symplectic_violation(&matrix);
        let scale = inf_norm(&matrix).max(1.0);
        if !(violation <= 1e-9 * scale * scale) {
            return Err(Error::NotSymplectic { violation });
        }
        let n = d / 2;
        let norm = matrix.clone().singular_values().max();
        let shift = &matrix - Matrix::identity(d, d);
        let tol = 1e-8 * norm;
        let e1_basis = null_space(&shift, tol);
        let e1_perp_basis = orth_complement(&e1_basis, d);
        let cokernel_basis = null_space(&shift.transpose(), tol);
        let shift_pinv = pinv(&shift, tol);
        Ok(Self { n, matrix, e1_basis, e1_perp_basis, cokernel_basis, shift_pinv })
    }

    pub fn identity(n: usize) -> Self {
        Self::new(Matrix::identity(2 * n, 2 * n)).expect("identity is symplectic")
    }

    /// `Psi_A = diag(A, (A^T)^{-1})`.
    pub fn from_a(a: &Matrix) -> Result<Self> {
        if a.nrows() != a.ncols() || a.nrows() == 0 {
            return Err(Error::DimensionMismatch { expected: a.nrows(), found: a.ncols() });
        }
        let inv_t = a.transpose().try_inverse().ok_or(Error::SingularMatrix)?;
        if !inv_t.iter().all(|v| v.is_finite()) || a.determinant().abs() < 1e-300 {
            return Err(Error::SingularMatrix);
        }
        Self::new(block_diag(&[a.clone(), inv_t]))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        2 * self.n
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn e1_basis(&self) -> &Matrix {
        &self.e1_basis
    }

    pub fn e1_perp_basis(&self) -> &Matrix {
        &self.e1_perp_basis
    }

    pub fn cokernel_basis(&self) -> &Matrix {
        &self.cokernel_basis
    }

    pub fn shift_pinv(&self) -> &Matrix {
        &self.shift_pinv
    }

    pub fn apply(&self, x: &Vector) -> Vector {
        &self.matrix * x
    }

    /// Orthogonal projection onto `E1 = ker(Psi - I)`.
    pub fn project_e1(&self, x: &Vector) -> Vector {
        &self.e1_basis * (self.e1_basis.transpose() * x)
    }

    pub fn is_identity(&self) -> bool {
        self.e1_perp_basis.ncols() == 0
    }

    /// `Phi Psi Phi^{-1}` for symplectic `Phi`.
    pub fn conjugate(&self, phi: &Matrix) -> Result<Self> {
        let inv = phi.clone().try_inverse().ok_or(Error::SingularMatrix)?;
        Self::new(phi * &self.matrix * inv)
    }

    /// `g(s) = det(Psi - e^{sJ})`.
    pub fn g(&self, s: f64) -> f64 {
        (&self.matrix - exp_sj(self.n, s)).determinant()
    }

    pub fn t_psi(&self) -> Result<TPsi> {
        let norm = self.matrix.clone().singular_values().max();
        let accept = 1e-10 * (1.0 + norm.powi(2 * self.n as i32));
        smallest_zero(|s| self.g(s), |s| min_singular_value(&(&self.matrix - exp_sj(self.n, s))), accept)
    }
}

/// Smallest zero in `(0, 2pi]` of the `n x n` determinant
/// `det(I + (A^T)^{-1} A - cos(s) (A + (A^T)^{-1}))`, an equivalent route to
/// `t(Psi_A)`.
pub fn t_psi_a_det(a: &Matrix) -> Result<TPsi> {
    let n = a.nrows();
    if n != a.ncols() || n == 0 {
        return Err(Error::DimensionMismatch { expected: n, found: a.ncols() });
    }
    let inv_t = a.transpose().try_inverse().ok_or(Error::SingularMatrix)?;
    let base = Matrix::identity(n, n) + &inv_t * a;
    let sum = a + &inv_t;
    let m = |s: f64| &base - &sum * s.cos();
    let scale = a.clone().singular_values().max() + inv_t.clone().singular_values().max();
    let accept = 1e-10 * (1.0 + scale.powi(n as i32));
    smallest_zero(|s| m(s).determinant(), |s| min_singular_value(&m(s)), accept)
}

/// Grid scan for sign changes and local minima of `|g|`, refined by bisection
/// on `g` or golden-section search on the smallest singular value `sigma`.
fn smallest_zero<G: Fn(f64) -> f64, S: Fn(f64) -> f64>(g: G, sigma: S, accept: f64) -> Result<TPsi> {
    let h = 2.0 * PI / GRID as f64;
    let vals: Vec<f64> = (0..=GRID + 1).map(|i| g(h * i as f64)).collect();
    let mut trace = Vec::new();
    for i in 1..=GRID {
        let (a, b) = (h * (i - 1) as f64, h * i as f64);
        let mut candidates: Vec<(&'static str, [f64; 2], f64)> = Vec::new();
        if vals[i] == 0.0 {
            candidates.push(("grid", [b, b], b));
        }
        if vals[i - 1] * vals[i] < 0.0 {
            let (root, _) = bisect(&g, a, b, 1e-15);
            candidates.push(("bisection", [a, b], root));
        }
        let ai = vals[i].abs();
        if ai <= vals[i - 1].abs() && ai <= vals[i + 1].abs() && vals[i] != 0.0 {
            let lo = h * (i - 1) as f64;
            let hi = h * (i + 1) as f64;
            let (root, _) = golden_section(&sigma, lo, hi, 1e-14);
            candidates.push(("golden-section", [lo, hi], root.min(2.0 * PI)));
        }
        for (method, bracket, root) in candidates {
            if root <= 0.0 {
                continue;
            }
            let residual = g(root).abs();
            let ok = residual < accept;
            trace.push(RefinementStep { method, bracket, root, residual, accepted: ok });
            if ok {
                return Ok(TPsi { value: root, trace });
            }
        }
    }
    Err(Error::NoZeroFound)
}

/// Random symplectic matrix built from a random `Psi_A`, a symmetric shear and
/// a rotation `e^{theta J}`.
pub fn random_symplectic<R: rand::Rng>(n: usize, rng: &mut R) -> Matrix {
    let a = Matrix::identity(n, n) + gaussian_matrix(n, n, rng) * 0.3;
    let inv_t = a.transpose().try_inverse().unwrap_or_else(|| Matrix::identity(n, n));
    let psi_a = block_diag(&[a, inv_t]);
    let s = gaussian_matrix(n, n, rng) * 0.3;
    let s = (&s + s.transpose()) * 0.5;
    let mut shear = Matrix::identity(2 * n, 2 * n);
    shear.view_mut((0, n), (n, n)).copy_from(&s);
    let theta: f64 = rng.gen_range(0.0..2.0 * PI);
    psi_a * shear * exp_sj(n, theta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::rotation2;

    #[test]
    fn identity_fixed_space() {
        let psi = SymplecticMap::identity(2);
        assert_eq!(psi.e1_basis().ncols(), 4);
        assert_eq!(psi.e1_perp_basis().ncols(), 0);
        assert!((psi.t_psi().unwrap().value - 2.0 * PI).abs() < 1e-8);
    }

    #[test]
    fn j_has_no_fixed_vectors() {
        let psi = SymplecticMap::new(j_matrix(1)).unwrap();
        assert_eq!(psi.e1_basis().ncols(), 0);
        let d = SymplecticMap::new(Matrix::from_diagonal(&Vector::from_vec(vec![2.0, 0.5]))).unwrap();
        assert_eq!(d.e1_basis().ncols(), 0);
    }

    #[test]
    fn rejects_non_symplectic() {
        let m = Matrix::from_diagonal(&Vector::from_vec(vec![2.0, 2.0]));
        assert!(matches!(SymplecticMap::new(m), Err(Error::NotSymplectic { .. })));
    }

    #[test]
    fn psi_from_a_examples() {
        let r = rotation2(0.4);
        let psi = SymplecticMap::from_a(&r).unwrap();
        assert!((psi.matrix() - block_diag(&[r.clone(), r])).amax() < 1e-14);
        let d = SymplecticMap::from_a(&Matrix::from_diagonal(&Vector::from_vec(vec![2.0, 1.0]))).unwrap();
        let expect = Matrix::from_diagonal(&Vector::from_vec(vec![2.0, 1.0, 0.5, 1.0]));
        assert!((d.matrix() - expect).amax() < 1e-15);
        assert_eq!(SymplecticMap::from_a(&Matrix::zeros(2, 2)).unwrap_err(), Error::SingularMatrix);
    }

    #[test]
    fn g_examples() {
        let psi = SymplecticMap::identity(1);
        assert!((psi.g(PI) - 4.0).abs() < 1e-14);
        assert!(psi.g(2.0 * PI).abs() < 1e-14);
        let th = 0.9;
        let rot = SymplecticMap::from_a(&rotation2(th)).unwrap();
        assert!(rot.g(th).abs() < 1e-12);
    }

    #[test]
    fn closed_forms() {
        let a = SymplecticMap::from_a(&rotation2(PI / 3.0)).unwrap();
        assert!((a.t_psi().unwrap().value - PI / 3.0).abs() < 1e-8);
        let m = SymplecticMap::from_a(&(-Matrix::identity(2, 2))).unwrap();
        assert!((m.t_psi().unwrap().value - PI).abs() < 1e-8);
        assert!((t_psi_a_det(&rotation2(0.7)).unwrap().value - 0.7).abs() < 1e-8);
        let a3 = block_diag(&[rotation2(0.5), -Matrix::identity(1, 1)]);
        assert!((t_psi_a_det(&a3).unwrap().value - 0.5).abs() < 1e-8);
        assert!((t_psi_a_det(&Matrix::identity(3, 3)).unwrap().value - 2.0 * PI).abs() < 1e-8);
    }
}
