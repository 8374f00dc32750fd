//! Largest inscribed balls through small linear programs.

use crate::{Matrix, Vector};
use microlp::{ComparisonOp, OptimizationDirection, Problem};

/// Maximise `t` over `x = anchor + B y` subject to `<a_i, x> + t |a_i| <= b_i`.
/// Returns the center and radius, or `None` when the program is infeasible or
/// unbounded (an unbounded region, e.g. too few halfspaces).
pub fn max_inscribed_ball(normals: &[Vector], offsets: &[f64], basis: &Matrix, anchor: &Vector) -> Option<(Vector, f64)> {
    let k = basis.ncols();
    let mut problem = Problem::new(OptimizationDirection::Maximize);
    let ys: Vec<_> = (0..k).map(|_| problem.add_var(0.0, (f64::NEG_INFINITY, f64::INFINITY))).collect();
    let t = problem.add_var(1.0, (f64::NEG_INFINITY, f64::INFINITY));
    for (a, &b) in normals.iter().zip(offsets) {
        let ab = basis.transpose() * a;
        let mut expr: Vec<(microlp::Variable, f64)> = ys.iter().zip(ab.iter()).map(|(&y, &c)| (y, c)).collect();
        expr.push((t, a.norm()));
        problem.add_constraint(expr, ComparisonOp::Le, b - a.dot(anchor));
    }
    let outcome = problem.solve().ok()?;
    let sol = outcome.solution()?;
    let y = Vector::from_iterator(k, ys.iter().map(|&v| sol.var_value(v)));
    let x = anchor + basis * y;
    Some((x, sol.var_value(t)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_chebyshev_center() {
        let normals = vec![
            Vector::from_vec(vec![1., 0.]),
            Vector::from_vec(vec![-1., 0.]),
            Vector::from_vec(vec![0., 1.]),
            Vector::from_vec(vec![0., -1.]),
        ];
        let (x, r) = max_inscribed_ball(&normals, &[3., 1., 1., 1.], &Matrix::identity(2, 2), &Vector::zeros(2)).unwrap();
        assert!((r - 1.0).abs() < 1e-9);
        assert!((x[1]).abs() < 1e-9 && x[0] > -1e-9 && x[0] < 2.0 + 1e-9);
    }

    #[test]
    fn restricted_to_line() {
        let normals = vec![
            Vector::from_vec(vec![1., 0.]),
            Vector::from_vec(vec![-1., 0.]),
            Vector::from_vec(vec![0., 1.]),
            Vector::from_vec(vec![0., -1.]),
        ];
        let basis = Matrix::from_column_slice(2, 1, &[1.0, 0.0]);
        let (x, r) = max_inscribed_ball(&normals, &[1., 1., 1., -0.5], &basis, &Vector::from_vec(vec![0.0, 0.5])).unwrap();
        assert!(r.abs() < 1e-9, "{r} {x}");
    }
}
