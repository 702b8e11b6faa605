use std::path::PathBuf;

/// Errors raised anywhere in the homogenization and surrogate pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid material constants: {0}")]
    InvalidMaterial(String),

    #[error("stiffness matrix is not positive definite ({0})")]
    NotPositiveDefinite(String),

    #[error("parameter `{name}` = {value} outside [{min}, {max}]")]
    OutOfBounds {
        name: String,
        value: f64,
        min: f64,
        max: f64,
    },

    #[error("infeasible geometry: {0}")]
    InfeasibleGeometry(String),

    #[error("resolution too coarse: {0}")]
    ResolutionTooCoarse(String),

    #[error("degenerate interval [{min}, {max}] for dimension {dim}")]
    DegenerateInterval { dim: usize, min: f64, max: f64 },

    #[error("singular system: {0}")]
    SingularSystem(String),

    #[error("solver did not converge after {iterations} iterations (relative residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("zero-variance model: Sobol indices are undefined")]
    ZeroVariance,

    #[error("too many failed runs: {failed} of {total}")]
    TooManyFailures { failed: usize, total: usize },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
