use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("body does not contain the origin in its interior")]
    BodyWithoutInteriorOrigin,
    #[error("direction must be nonzero")]
    ZeroDirection,
    #[error("invalid exponent p = {0}")]
    InvalidExponent(f64),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid body: {0}")]
    InvalidBody(String),
    #[error("matrix is not symplectic (violation {violation:.3e})")]
    NotSymplectic { violation: f64 },
    #[error("matrix is singular")]
    SingularMatrix,
    #[error("no zero of the determinant function found in (0, 2pi]")]
    NoZeroFound,
    #[error("no fixed point of the twist lies in the interior of the body")]
    NoFixedInteriorPoint,
    #[error("carrier validation failed: max gauge residual {max_gauge_residual:.3e}, action mismatch {action_mismatch:.3e}")]
    CarrierValidationFailed {
        max_gauge_residual: f64,
        action_mismatch: f64,
        gauge_residuals: Vec<f64>,
    },
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error("degenerate ray: start point on the boundary with an outward tangent direction")]
    DegenerateRay,
    #[error("tangential impact (normal component {normal_component:.3e})")]
    TangentialImpact { normal_component: f64 },
    #[error("no billiard trajectory found below the residual threshold")]
    NoTrajectoryFound,
    #[error("lift validation failed at arc {arc}: {reason}")]
    LiftValidationFailed { arc: usize, reason: String },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
