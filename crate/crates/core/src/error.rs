use thiserror::Error;

use crate::funk::VolumeEstimate;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone)]
pub enum Error {
    #[error("empty input: at least one point is required")]
    EmptyInput,
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("point is not strictly interior to the polytope")]
    PointNotInterior,
    #[error("origin is not strictly interior to the polytope")]
    OriginNotInterior,
    #[error("radius must be positive, got {0}")]
    NonpositiveRadius(f64),
    #[error("degenerate pairing: 1 - <q, v> = {0:e} is not positive")]
    DegeneratePairing(f64),
    #[error("quadrature tolerance not reached: estimate {} +/- {:e} after {} evaluations", .0.value, .0.abs_error_estimate, .0.evaluations)]
    ToleranceNotReached(VolumeEstimate),
    #[error("ode tolerance not reached at t = {0}")]
    OdeToleranceNotReached(f64),
    #[error("inner body is not strictly contained in the outer body")]
    NotStrictlyContained,
    #[error("collineation maps the polytope through the hyperplane at infinity")]
    MapsThroughInfinity,
    #[error("polytope is not centrally symmetric")]
    NotCentrallySymmetric,
    #[error("wrong flag count: expected {expected}, found {found}")]
    WrongFlagCount { expected: usize, found: usize },
    #[error("iteration budget exhausted after {iterations} iterations (residual {residual:e})")]
    MaxIterations { iterations: usize, residual: f64 },
    #[error("dimension {0} is too large")]
    DimensionTooLarge(usize),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("parse error: {0}")]
    Parse(String),
}

/// Pipeline stage an error belongs to, used for CLI reporting.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Parse,
    Geometry,
    Quadrature,
    Optimization,
}

impl Stage {
    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Parse => "parse",
            Stage::Geometry => "geometry",
            Stage::Quadrature => "quadrature",
            Stage::Optimization => "optimization",
        }
    }
}

impl Error {
    pub fn stage(&self) -> Stage {
        match self {
            Error::Parse(_) | Error::InvalidArgument(_) | Error::DimensionTooLarge(_) => Stage::Parse,
            Error::ToleranceNotReached(_) | Error::OdeToleranceNotReached(_) => Stage::Quadrature,
            Error::MaxIterations { .. } => Stage::Optimization,
            _ => Stage::Geometry,
        }
    }
}
