//! Discretised loops `x_0, ..., x_{N-1}` closed by the twist `x_N = Psi x_0`.

use crate::error::{Error, Result};
use crate::geometry::ConvexBody;
use crate::linalg::{apply_j, apply_neg_j};
use crate::symplectic::SymplecticMap;
use crate::Vector;
use std::f64::consts::PI;

#[derive(Debug, Clone)]
pub struct DiscretePath {
    nodes: Vec<Vector>,
    psi: SymplecticMap,
}

impl DiscretePath {
    pub fn new(nodes: Vec<Vector>, psi: SymplecticMap) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::InvalidBody("a path needs at least two nodes".into()));
        }
        for x in &nodes {
            if x.len() != psi.dim() {
                return Err(Error::DimensionMismatch { expected: psi.dim(), found: x.len() });
            }
        }
        Ok(Self { nodes, psi })
    }

    /// Same as [`DiscretePath::new`] but moves `x_0` into `E1^perp` by
    /// subtracting its `E1` component from every node, which leaves the action
    /// unchanged.
    pub fn admissible(nodes: Vec<Vector>, psi: SymplecticMap) -> Result<Self> {
        let shift = psi.project_e1(&nodes[0]);
        let nodes = nodes.into_iter().map(|x| x - &shift).collect();
        Self::new(nodes, psi)
    }

    /// Counter-clockwise circle of the given radius in the `(q_1, p_1)` plane.
    pub fn circle(n_nodes: usize, radius: f64, psi: SymplecticMap) -> Result<Self> {
        let n = psi.n();
        let nodes = (0..n_nodes)
            .map(|k| {
                let t = 2.0 * PI * k as f64 / n_nodes as f64;
                let mut x = Vector::zeros(2 * n);
                x[0] = radius * t.cos();
                x[n] = radius * t.sin();
                x
            })
            .collect();
        Self::new(nodes, psi)
    }

    /// Boundary of a planar polygon sampled with `per_edge` nodes per edge.
    pub fn polygon_loop(vertices: &[Vector], per_edge: usize) -> Result<Self> {
        let m = vertices.len();
        let mut nodes = Vec::with_capacity(m * per_edge);
        for i in 0..m {
            let a = &vertices[i];
            let b = &vertices[(i + 1) % m];
            for k in 0..per_edge {
                let t = k as f64 / per_edge as f64;
                nodes.push(a * (1.0 - t) + b * t);
            }
        }
        Self::new(nodes, SymplecticMap::identity(1))
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[Vector] {
        &self.nodes
    }

    pub fn psi(&self) -> &SymplecticMap {
        &self.psi
    }

    /// `x_N = Psi x_0`.
    pub fn closing_node(&self) -> Vector {
        self.psi.apply(&self.nodes[0])
    }

    /// `x_k` for `k = 0..=N`.
    pub fn node(&self, k: usize) -> Vector {
        if k == self.nodes.len() {
            self.closing_node()
        } else {
            self.nodes[k].clone()
        }
    }

    /// Forward differences `x_{k+1} - x_k`, `k = 0..N`.
    pub fn segments(&self) -> Vec<Vector> {
        (0..self.nodes.len()).map(|k| self.node(k + 1) - &self.nodes[k]).collect()
    }

    /// Trapezoidal action `1/2 sum <-J (x_{k+1} - x_k), (x_k + x_{k+1}) / 2>`.
    pub fn action(&self) -> f64 {
        let n = self.nodes.len();
        (0..n)
            .map(|k| {
                let a = &self.nodes[k];
                let b = self.node(k + 1);
                let d = &b - a;
                0.25 * apply_neg_j(&d).dot(&(a + &b))
            })
            .sum()
    }

    /// `sum_k dt (h(-J xdot_k) / 2)^p` with forward-difference velocities.
    pub fn i_p(&self, body: &ConvexBody, p: f64) -> Result<f64> {
        if !(p >= 1.0) {
            return Err(Error::InvalidExponent(p));
        }
        if !body.origin_interior() {
            return Err(Error::BodyWithoutInteriorOrigin);
        }
        if body.dim() != self.psi.dim() {
            return Err(Error::DimensionMismatch { expected: self.psi.dim(), found: body.dim() });
        }
        let n = self.nodes.len() as f64;
        Ok(self
            .segments()
            .iter()
            .map(|d| (0.5 * body.support_value(&apply_neg_j(&(d * n)))).powf(p) / n)
            .sum())
    }

    /// The same loop traversed backwards; it closes up under `Psi^{-1}`.
    pub fn reversed(&self) -> Result<Self> {
        let inv = self.psi.matrix().clone().try_inverse().ok_or(Error::SingularMatrix)?;
        let psi = SymplecticMap::new(inv)?;
        let n = self.nodes.len();
        let nodes = (0..n).map(|k| self.node(n - k)).collect();
        Self::new(nodes, psi)
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        Self { nodes: self.nodes.iter().map(|x| x * alpha).collect(), psi: self.psi.clone() }
    }

    pub fn translated(&self, by: &Vector) -> Self {
        Self { nodes: self.nodes.iter().map(|x| x + by).collect(), psi: self.psi.clone() }
    }

    /// `J` applied to every node; convenience for diagnostics.
    pub fn rotated_by_j(&self) -> Vec<Vector> {
        self.nodes.iter().map(apply_j).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.nodes.iter().map(|x| x.iter().copied().collect()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_action_and_functional() {
        let c = DiscretePath::circle(256, 1.0, SymplecticMap::identity(1)).unwrap();
        assert!((c.action() - PI).abs() / PI < 1e-3);
        let ball = ConvexBody::unit_ball(2);
        assert!((c.i_p(&ball, 2.0).unwrap() - PI * PI).abs() / (PI * PI) < 5e-3);
        let c2 = c.scaled(2.0);
        assert!((c2.i_p(&ball, 2.0).unwrap() - 4.0 * c.i_p(&ball, 2.0).unwrap()).abs() < 1e-12);
        assert!((c.reversed().unwrap().action() + c.action()).abs() < 1e-12);
    }

    #[test]
    fn square_boundary_shoelace() {
        let v = |a: f64, b: f64| Vector::from_vec(vec![a, b]);
        let sq = DiscretePath::polygon_loop(&[v(-1., -1.), v(1., -1.), v(1., 1.), v(-1., 1.)], 8).unwrap();
        assert!((sq.action() - 4.0).abs() < 1e-12);
        let body = ConvexBody::cube(2, 1.0).unwrap();
        let brute: f64 = sq.segments().iter().map(|d| 0.5 * body.support_value(&apply_neg_j(d))).sum();
        assert!((sq.i_p(&body, 1.0).unwrap() - brute).abs() < 1e-12);
    }
}
