//! JSON body descriptions, e.g. `{"type":"ball","center":[0,0],"radius":1}`.

use super::ConvexBody;
use crate::error::{Error, Result};
use crate::linalg::from_rows;
use crate::Vector;
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum BodySpec {
    Ball {
        center: Vec<f64>,
        radius: f64,
    },
    /// `{x : (x-c)^T Q (x-c) <= 1}` with `matrix = Q`.
    Ellipsoid {
        matrix: Vec<Vec<f64>>,
        #[serde(default)]
        center: Option<Vec<f64>>,
    },
    Polytope {
        vertices: Vec<Vec<f64>>,
    },
    Psum {
        p: f64,
        left: Box<BodySpec>,
        right: Box<BodySpec>,
    },
    Product {
        left: Box<BodySpec>,
        right: Box<BodySpec>,
    },
    Polar {
        body: Box<BodySpec>,
    },
    Translate {
        by: Vec<f64>,
        body: Box<BodySpec>,
    },
    Linear {
        matrix: Vec<Vec<f64>>,
        body: Box<BodySpec>,
    },
    Box {
        lo: Vec<f64>,
        hi: Vec<f64>,
    },
    Intersection {
        left: Box<BodySpec>,
        right: Box<BodySpec>,
    },
}

impl BodySpec {
    pub fn build(&self) -> Result<ConvexBody> {
        match self {
            BodySpec::Ball { center, radius } => ConvexBody::ball(Vector::from_vec(center.clone()), *radius),
            BodySpec::Ellipsoid { matrix, center } => {
                let q = from_rows(matrix);
                let c = center.clone().unwrap_or_else(|| vec![0.0; q.nrows()]);
                ConvexBody::ellipsoid(q, Vector::from_vec(c))
            }
            BodySpec::Polytope { vertices } => {
                let pts: Vec<Vector> = vertices.iter().map(|v| Vector::from_vec(v.clone())).collect();
                ConvexBody::polytope(&pts)
            }
            BodySpec::Psum { p, left, right } => ConvexBody::psum(left.build()?, right.build()?, *p),
            BodySpec::Product { left, right } => Ok(ConvexBody::product(left.build()?, right.build()?)),
            BodySpec::Polar { body } => body.build()?.polar(),
            BodySpec::Translate { by, body } => body.build()?.translate(&Vector::from_vec(by.clone())),
            BodySpec::Linear { matrix, body } => body.build()?.linear(&from_rows(matrix)),
            BodySpec::Box { lo, hi } => ConvexBody::boxed(lo, hi),
            BodySpec::Intersection { left, right } => left.build()?.intersection(&right.build()?),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("body spec serialises")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_nested_spec() {
        let text = r#"{"type":"psum","p":2,
            "left":{"type":"ball","center":[0,0],"radius":1},
            "right":{"type":"translate","by":[0.1,0],"body":{"type":"polytope","vertices":[[1,1],[-1,1],[-1,-1],[1,-1]]}}}"#;
        let spec = BodySpec::from_json(text).unwrap();
        let body = spec.build().unwrap();
        assert_eq!(body.dim(), 2);
        let again = BodySpec::from_json(&spec.to_json()).unwrap();
        assert_eq!(spec, again);
    }

    #[test]
    fn rejects_unknown_type() {
        assert!(matches!(BodySpec::from_json(r#"{"type":"torus"}"#), Err(Error::Parse(_))));
    }
}
