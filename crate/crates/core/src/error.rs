use thiserror::Error;

/// Errors raised by the density, oracle, solver and report layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum DepthError {
    #[error("no closed form available for {0} and no sampler configured")]
    UnsupportedAnalytic(&'static str),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("estimator error: {0}")]
    Estimator(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("argmin at the query point is not unique ({clusters} clusters)")]
    NonUniqueArgmin { clusters: usize },

    #[error("density is not uniform on a convex polygon")]
    NotUniformConvex,

    #[error("density has mass {outside:e} outside [{a}, {b}]")]
    BadSupport { a: f64, b: f64, outside: f64 },

    #[error("no upwind neighbor available")]
    NoNeighbor,

    #[error("no convergence after {iterations} iterations (last max update {max_update:e})")]
    NoConvergence { iterations: usize, max_update: f64 },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("affine map is singular (det = {0:e})")]
    SingularTransform(f64),

    #[error("level {0} is outside the field range")]
    EmptyLevel(f64),

    #[error("i/o: {0}")]
    Io(String),
}

pub type Result<T, E = DepthError> = std::result::Result<T, E>;
