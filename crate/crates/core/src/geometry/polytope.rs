//! Polytopes stored with both vertex and facet descriptions.

use crate::error::{Error, Result};
use crate::linalg::null_space;
use crate::Vector;

#[derive(Debug, Clone, PartialEq)]
pub struct Facet {
    /// Outward unit normal.
    pub normal: Vector,
    pub offset: f64,
}

#[derive(Debug, Clone)]
pub struct Polytope {
    pub dim: usize,
    pub vertices: Vec<Vector>,
    pub facets: Vec<Facet>,
    /// Mean of the vertices; always an interior point.
    pub centroid: Vector,
}

fn scale_of(points: &[Vector]) -> f64 {
    points.iter().map(|p| p.amax()).fold(1e-300, f64::max).max(1.0)
}

fn combinations(m: usize, k: usize, mut visit: impl FnMut(&[usize])) {
    if k > m {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        visit(&idx);
        let mut i = k;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] != i + m - k {
                break;
            }
            if i == 0 && idx[0] == m - k {
                return;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

fn hull_2d(points: &[Vector], tol: f64) -> Vec<Vector> {
    let mut pts: Vec<(f64, f64)> = points.iter().map(|p| (p[0], p[1])).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    pts.dedup_by(|a, b| (a.0 - b.0).abs() <= tol && (a.1 - b.1).abs() <= tol);
    if pts.len() < 3 {
        return pts.iter().map(|&(x, y)| Vector::from_vec(vec![x, y])).collect();
    }
    let cross = |o: (f64, f64), a: (f64, f64), b: (f64, f64)| (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0);
    let mut lower: Vec<(f64, f64)> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= tol * tol {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<(f64, f64)> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= tol * tol {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower.into_iter().map(|(x, y)| Vector::from_vec(vec![x, y])).collect()
}

impl Polytope {
    /// Convex hull of a finite point set; the hull must be full-dimensional.
    pub fn from_points(points: &[Vector]) -> Result<Self> {
        let dim = points.first().map(|p| p.len()).ok_or_else(|| Error::InvalidBody("polytope without vertices".into()))?;
        if dim == 0 {
            return Err(Error::InvalidBody("zero-dimensional polytope".into()));
        }
        for p in points {
            if p.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: p.len() });
            }
            if p.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidBody("non-finite vertex".into()));
            }
        }
        let scale = scale_of(points);
        let tol = 1e-9 * scale;
        let (vertices, facets) = match dim {
            1 => {
                let lo = points.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min);
                let hi = points.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max);
                if hi - lo <= tol {
                    return Err(Error::InvalidBody("degenerate segment".into()));
                }
                (
                    vec![Vector::from_element(1, lo), Vector::from_element(1, hi)],
                    vec![
                        Facet { normal: Vector::from_element(1, -1.0), offset: -lo },
                        Facet { normal: Vector::from_element(1, 1.0), offset: hi },
                    ],
                )
            }
            2 => {
                let hull = hull_2d(points, tol);
                if hull.len() < 3 {
                    return Err(Error::InvalidBody("polygon is not full-dimensional".into()));
                }
                let m = hull.len();
                let facets = (0..m)
                    .map(|i| {
                        let a = &hull[i];
                        let b = &hull[(i + 1) % m];
                        let e = b - a;
                        let n = Vector::from_vec(vec![e[1], -e[0]]).normalize();
                        let offset = n.dot(a);
                        Facet { normal: n, offset }
                    })
                    .collect();
                (hull, facets)
            }
            _ => Self::hull_brute_force(points, dim, tol)?,
        };
        let centroid = vertices.iter().fold(Vector::zeros(dim), |acc, v| acc + v) / vertices.len() as f64;
        Ok(Self { dim, vertices, facets, centroid })
    }

    fn hull_brute_force(points: &[Vector], dim: usize, tol: f64) -> Result<(Vec<Vector>, Vec<Facet>)> {
        let mut pts: Vec<Vector> = Vec::new();
        for p in points {
            if !pts.iter().any(|q| (q - p).amax() <= tol) {
                pts.push(p.clone());
            }
        }
        let diffs = crate::Matrix::from_fn(pts.len().saturating_sub(1), dim, |i, j| pts[i + 1][j] - pts[0][j]);
        if pts.len() <= dim || diffs.rank(tol) < dim {
            return Err(Error::InvalidBody("polytope is not full-dimensional".into()));
        }
        let mut facets: Vec<Facet> = Vec::new();
        combinations(pts.len(), dim, |idx| {
            let rows = crate::Matrix::from_fn(dim - 1, dim, |i, j| pts[idx[i + 1]][j] - pts[idx[0]][j]);
            let ns = null_space(&rows, 1e-10 * rows.amax().max(1e-300));
            if ns.ncols() != 1 {
                return;
            }
            let mut n: Vector = ns.column(0).into_owned();
            let mut b = n.dot(&pts[idx[0]]);
            let mut above = false;
            let mut below = false;
            for p in &pts {
                let s = n.dot(p) - b;
                if s > tol {
                    above = true;
                }
                if s < -tol {
                    below = true;
                }
            }
            if above && below {
                return;
            }
            if above {
                n = -n;
                b = -b;
            }
            if !facets.iter().any(|f| (&f.normal - &n).amax() < 1e-7 && (f.offset - b).abs() < 1e-7 * (1.0 + b.abs())) {
                facets.push(Facet { normal: n, offset: b });
            }
        });
        let vertices: Vec<Vector> = pts
            .into_iter()
            .filter(|p| facets.iter().filter(|f| (f.normal.dot(p) - f.offset).abs() <= tol).count() >= dim)
            .collect();
        Ok((vertices, facets))
    }

    /// Polytope `{x : <a_i, x> <= b_i}`; must be bounded and full-dimensional.
    pub fn from_halfspaces(normals: &[Vector], offsets: &[f64]) -> Result<Self> {
        let dim = normals.first().map(|a| a.len()).ok_or_else(|| Error::InvalidBody("no halfspaces".into()))?;
        let scale = offsets.iter().fold(1.0f64, |a, b| a.max(b.abs()));
        let tol = 1e-9 * scale;
        let mut points: Vec<Vector> = Vec::new();
        combinations(normals.len(), dim, |idx| {
            let a = crate::Matrix::from_fn(dim, dim, |i, j| normals[idx[i]][j]);
            let b = Vector::from_iterator(dim, idx.iter().map(|&i| offsets[i]));
            let Some(x) = a.lu().solve(&b) else { return };
            if !x.iter().all(|v| v.is_finite()) {
                return;
            }
            let feasible = normals.iter().zip(offsets).all(|(n, &o)| n.dot(&x) <= o + tol * (1.0 + n.norm()));
            if feasible && !points.iter().any(|p| (p - &x).amax() <= tol) {
                points.push(x);
            }
        });
        if points.is_empty() {
            return Err(Error::InvalidBody("empty or unbounded halfspace intersection".into()));
        }
        Self::from_points(&points)
    }

    /// `max_i <v_i, w>` and the average of the maximising vertices.
    pub fn support(&self, w: &Vector) -> (f64, Vector) {
        let vals: Vec<f64> = self.vertices.iter().map(|v| v.dot(w)).collect();
        let best = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let tol = 1e-12 * (1.0 + best.abs());
        let mut point = Vector::zeros(self.dim);
        let mut count = 0.0;
        for (v, &s) in self.vertices.iter().zip(&vals) {
            if s >= best - tol {
                point += v;
                count += 1.0;
            }
        }
        (best, point / count)
    }

    /// Gauge of `P - c` at `z`, i.e. the inverse exit distance from `c` along `z`.
    pub fn gauge_about(&self, c: &Vector, z: &Vector) -> f64 {
        self.facets
            .iter()
            .map(|f| f.normal.dot(z) / (f.offset - f.normal.dot(c)))
            .fold(0.0, f64::max)
    }

    pub fn contains_interior(&self, x: &Vector, margin: f64) -> bool {
        self.facets.iter().all(|f| f.normal.dot(x) < f.offset - margin)
    }

    /// Facets active at `y` within `tol`.
    pub fn active_facets(&self, y: &Vector, tol: f64) -> Vec<&Facet> {
        let mut act: Vec<&Facet> = self.facets.iter().filter(|f| (f.normal.dot(y) - f.offset).abs() <= tol).collect();
        if act.is_empty() {
            let best = self
                .facets
                .iter()
                .max_by(|a, b| (a.normal.dot(y) - a.offset).total_cmp(&(b.normal.dot(y) - b.offset)));
            act.extend(best);
        }
        act
    }

    pub fn translated(&self, t: &Vector) -> Self {
        Self {
            dim: self.dim,
            vertices: self.vertices.iter().map(|v| v + t).collect(),
            facets: self
                .facets
                .iter()
                .map(|f| Facet { normal: f.normal.clone(), offset: f.offset + f.normal.dot(t) })
                .collect(),
            centroid: &self.centroid + t,
        }
    }

    /// Area (2-D) by the shoelace formula on the counter-clockwise hull.
    pub fn area_2d(&self) -> Option<f64> {
        if self.dim != 2 {
            return None;
        }
        let v = &self.vertices;
        let m = v.len();
        Some(0.5 * (0..m).map(|i| v[i][0] * v[(i + 1) % m][1] - v[(i + 1) % m][0] * v[i][1]).sum::<f64>())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &[f64]) -> Vector {
        Vector::from_vec(x.to_vec())
    }

    #[test]
    fn square_hull_and_facets() {
        let pts = vec![v(&[1., 1.]), v(&[-1., 1.]), v(&[-1., -1.]), v(&[1., -1.]), v(&[0., 0.]), v(&[1., 0.])];
        let p = Polytope::from_points(&pts).unwrap();
        assert_eq!(p.vertices.len(), 4);
        assert_eq!(p.facets.len(), 4);
        assert!((p.area_2d().unwrap() - 4.0).abs() < 1e-14);
        assert!((p.gauge_about(&v(&[0., 0.]), &v(&[0.5, -2.])) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn cube_brute_force() {
        let mut pts = Vec::new();
        for i in 0..8 {
            let c = |b: usize| if i >> b & 1 == 1 { 1.0 } else { -1.0 };
            pts.push(v(&[c(0), c(1), c(2)]));
        }
        pts.push(v(&[0.0, 0.0, 1.0]));
        let p = Polytope::from_points(&pts).unwrap();
        assert_eq!(p.facets.len(), 6);
        assert_eq!(p.vertices.len(), 8);
    }

    #[test]
    fn halfspace_square() {
        let normals = vec![v(&[1., 0.]), v(&[-1., 0.]), v(&[0., 1.]), v(&[0., -1.])];
        let p = Polytope::from_halfspaces(&normals, &[1., 1., 2., 0.]).unwrap();
        assert!((p.area_2d().unwrap() - 4.0).abs() < 1e-12);
    }
}
