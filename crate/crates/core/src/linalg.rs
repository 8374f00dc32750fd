//! Small dense linear algebra helpers on top of nalgebra.

use crate::{Matrix, Vector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Standard complex structure `J = [[0, -I], [I, 0]]` on `R^{2n}`.
pub fn j_matrix(n: usize) -> Matrix {
    let mut j = Matrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        j[(i, n + i)] = -1.0;
        j[(n + i, i)] = 1.0;
    }
    j
}

/// `J z` without forming the matrix: `(q, p) -> (-p, q)`.
pub fn apply_j(z: &Vector) -> Vector {
    let n = z.len() / 2;
    let mut out = Vector::zeros(z.len());
    for i in 0..n {
        out[i] = -z[n + i];
        out[n + i] = z[i];
    }
    out
}

/// `-J z = (p, -q)`.
pub fn apply_neg_j(z: &Vector) -> Vector {
    let n = z.len() / 2;
    let mut out = Vector::zeros(z.len());
    for i in 0..n {
        out[i] = z[n + i];
        out[n + i] = -z[i];
    }
    out
}

/// `e^{sJ} = cos(s) I + sin(s) J`.
pub fn exp_sj(n: usize, s: f64) -> Matrix {
    let (sn, cs) = s.sin_cos();
    Matrix::identity(2 * n, 2 * n) * cs + j_matrix(n) * sn
}

pub fn rotation2(theta: f64) -> Matrix {
    let (s, c) = theta.sin_cos();
    Matrix::from_row_slice(2, 2, &[c, -s, s, c])
}

pub fn block_diag(blocks: &[Matrix]) -> Matrix {
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = Matrix::zeros(rows, cols);
    let (mut r, mut c) = (0, 0);
    for b in blocks {
        out.view_mut((r, c), (b.nrows(), b.ncols())).copy_from(b);
        r += b.nrows();
        c += b.ncols();
    }
    out
}

pub fn inf_norm(m: &Matrix) -> f64 {
    m.iter().fold(0.0f64, |a, v| a.max(v.abs()))
}

/// Orthonormal basis (as columns) of the null space of `m`; singular values
/// below `tol` count as zero.
pub fn null_space(m: &Matrix, tol: f64) -> Matrix {
    let cols = m.ncols();
    let mut sq = Matrix::zeros(cols.max(m.nrows()), cols);
    sq.view_mut((0, 0), (m.nrows(), cols)).copy_from(m);
    let svd = sq.svd(false, true);
    let vt = svd.v_t.expect("svd v_t");
    let picked: Vec<usize> = (0..cols)
        .filter(|&i| svd.singular_values[i] <= tol)
        .collect();
    let mut out = Matrix::zeros(cols, picked.len());
    for (k, &i) in picked.iter().enumerate() {
        out.set_column(k, &vt.row(i).transpose());
    }
    out
}

/// Orthonormal basis of the orthogonal complement of the column span of `basis`.
pub fn orth_complement(basis: &Matrix, dim: usize) -> Matrix {
    if basis.ncols() == 0 {
        return Matrix::identity(dim, dim);
    }
    null_space(&basis.transpose(), 1e-10)
}

/// Moore–Penrose pseudo-inverse with an absolute singular value cutoff.
pub fn pinv(m: &Matrix, tol: f64) -> Matrix {
    m.clone()
        .svd(true, true)
        .pseudo_inverse(tol)
        .expect("pseudo inverse")
}

/// Smallest singular value of a square matrix.
pub fn min_singular_value(m: &Matrix) -> f64 {
    m.singular_values().iter().fold(f64::INFINITY, |a, &v| a.min(v))
}

/// Right singular vector for the smallest singular value.
pub fn min_singular_vector(m: &Matrix) -> Vector {
    let svd = m.clone().svd(false, true);
    let vt = svd.v_t.expect("svd v_t");
    let (idx, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |(bi, bv), (i, &v)| if v < bv { (i, v) } else { (bi, bv) });
    vt.row(idx).transpose()
}

/// Euclidean projection of `u` onto the cone generated by `gens`, by
/// enumerating candidate active sets (generator counts here are small).
pub fn project_onto_cone(u: &Vector, gens: &[Vector]) -> Vector {
    let dim = u.len();
    let mut uniq: Vec<Vector> = Vec::new();
    for g in gens {
        if g.norm() > 1e-14 && !uniq.iter().any(|h| (h - g).amax() < 1e-12) {
            uniq.push(g.clone());
        }
    }
    uniq.truncate(12);
    let m = uniq.len();
    let mut best = Vector::zeros(dim);
    let mut best_dist = u.norm();
    for mask in 1usize..(1 << m) {
        let idx: Vec<usize> = (0..m).filter(|i| mask >> i & 1 == 1).collect();
        if idx.len() > dim {
            continue;
        }
        let g = Matrix::from_fn(dim, idx.len(), |r, c| uniq[idx[c]][r]);
        let gram = g.transpose() * &g;
        let Some(coef) = gram.lu().solve(&(g.transpose() * u)) else { continue };
        if coef.iter().any(|&c| c < -1e-14 || !c.is_finite()) {
            continue;
        }
        let p = &g * coef;
        let dist = (u - &p).norm();
        if dist < best_dist - 1e-15 {
            best_dist = dist;
            best = p;
        }
    }
    best
}

/// Angle between `u` and the cone generated by `gens` (`pi/2` if the
/// projection vanishes).
pub fn angle_to_cone(u: &Vector, gens: &[Vector]) -> f64 {
    let p = project_onto_cone(u, gens);
    let (nu, np) = (u.norm(), p.norm());
    if np <= 1e-14 * nu.max(1e-300) {
        return std::f64::consts::FRAC_PI_2;
    }
    (u.dot(&p) / (nu * np)).clamp(-1.0, 1.0).acos()
}

/// Orthonormal basis (columns) of the tangent space of the sphere at unit `u`.
pub fn tangent_basis(u: &Vector) -> Matrix {
    let m = Matrix::from_column_slice(u.len(), 1, u.as_slice());
    orth_complement(&m, u.len())
}

/// Orthogonal reflection `O` with `O u = e_1` for a unit vector `u`.
pub fn householder_to_e1(u: &Vector) -> Matrix {
    let d = u.len();
    let mut e1 = Vector::zeros(d);
    e1[0] = 1.0;
    let w = u - &e1;
    let wn = w.norm_squared();
    if wn < 1e-28 {
        return Matrix::identity(d, d);
    }
    Matrix::identity(d, d) - (&w * w.transpose()) * (2.0 / wn)
}

/// Deterministic pseudo-random unit directions in `R^dim`. In the plane the
/// directions are equally spaced angles.
pub fn sphere_grid(dim: usize, count: usize, seed: u64) -> Vec<Vector> {
    match dim {
        0 => Vec::new(),
        1 => vec![Vector::from_element(1, 1.0), Vector::from_element(1, -1.0)],
        2 => (0..count)
            .map(|k| {
                let a = 2.0 * std::f64::consts::PI * (k as f64 + 0.5) / count as f64;
                Vector::from_vec(vec![a.cos(), a.sin()])
            })
            .collect(),
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut out = Vec::with_capacity(count);
            while out.len() < count {
                let v = gaussian_vector(dim, &mut rng);
                let n = v.norm();
                if n > 1e-12 {
                    out.push(v / n);
                }
            }
            out
        }
    }
}

pub fn gaussian_vector<R: rand::Rng>(dim: usize, rng: &mut R) -> Vector {
    Vector::from_iterator(dim, (0..dim).map(|_| StandardNormal.sample(rng)))
}

pub fn gaussian_matrix<R: rand::Rng>(rows: usize, cols: usize, rng: &mut R) -> Matrix {
    Matrix::from_iterator(rows, cols, (0..rows * cols).map(|_| StandardNormal.sample(rng)))
}

/// Haar-ish random orthogonal matrix via QR of a Gaussian matrix.
pub fn random_orthogonal<R: rand::Rng>(dim: usize, rng: &mut R) -> Matrix {
    let g = gaussian_matrix(dim, dim, rng);
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    let mut q = q;
    for i in 0..dim {
        if r[(i, i)] < 0.0 {
            let c = -q.column(i);
            q.set_column(i, &c);
        }
    }
    q
}

pub fn from_rows(rows: &[Vec<f64>]) -> Matrix {
    let r = rows.len();
    let c = rows.first().map_or(0, |x| x.len());
    Matrix::from_fn(r, c, |i, j| rows[i][j])
}

pub fn to_rows(m: &Matrix) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn j_squares_to_minus_identity() {
        let j = j_matrix(3);
        let jj = &j * &j;
        assert!((jj + Matrix::identity(6, 6)).norm() < 1e-15);
        let z = Vector::from_vec(vec![1., 2., 3., 4., 5., 6.]);
        assert!((apply_j(&z) - &j * &z).norm() < 1e-15);
        assert!((apply_neg_j(&z) + &j * &z).norm() < 1e-15);
    }

    #[test]
    fn exp_at_pi_is_minus_identity() {
        let e = exp_sj(2, std::f64::consts::PI);
        assert!((e + Matrix::identity(4, 4)).norm() < 1e-14);
    }

    #[test]
    fn cone_projection() {
        let g = vec![Vector::from_vec(vec![1., 0.]), Vector::from_vec(vec![0., 1.])];
        let p = project_onto_cone(&Vector::from_vec(vec![1., -1.]), &g);
        assert!((p - Vector::from_vec(vec![1., 0.])).norm() < 1e-14);
        assert!(angle_to_cone(&Vector::from_vec(vec![1., 1.]), &g) < 1e-7);
        assert!((angle_to_cone(&Vector::from_vec(vec![-1., -1.]), &g) - std::f64::consts::FRAC_PI_2).abs() < 1e-14);
    }

    #[test]
    fn householder_maps_to_e1() {
        let u = Vector::from_vec(vec![0.6, 0.0, 0.8]);
        let o = householder_to_e1(&u);
        let e = &o * &u;
        assert!((e[0] - 1.0).abs() < 1e-14 && e[1].abs() < 1e-14 && e[2].abs() < 1e-14);
        assert!((&o * o.transpose() - Matrix::identity(3, 3)).norm() < 1e-14);
    }

    #[test]
    fn null_space_of_rank_deficient() {
        let m = from_rows(&[vec![1., 1., 0.], vec![2., 2., 0.]]);
        let ns = null_space(&m, 1e-10);
        assert_eq!(ns.ncols(), 2);
        assert!((&m * &ns).norm() < 1e-12);
    }
}
