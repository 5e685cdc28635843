use thiserror::Error;

/// Errors produced by the construction pipeline.
#[derive(Error, Debug)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("operation requires sphere dimension m = {required}, got m = {got}")]
    UnsupportedDimension { required: u32, got: u32 },

    #[error("integer overflow while computing {0}")]
    Overflow(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error(
        "candidate matrix is rank deficient: found {found} independent columns, need {needed} (mesh too coarse)"
    )]
    RankDeficient { found: usize, needed: usize },

    #[error(
        "Gramian is not positive definite at tolerance {tolerance:e} (lambda_min = {lambda_min:e}); \
         the node set fails the Riesz property, regenerate nodes or increase epsilon"
    )]
    NotPositiveDefinite { lambda_min: f64, tolerance: f64 },

    #[error("symmetric eigensolver failed to converge")]
    EigensolverFailure,

    #[error("orthonormality verification failed: residual {residual:e} exceeds tolerance {tolerance:e}")]
    VerificationFailure { residual: f64, tolerance: f64 },

    #[error("function index {index} out of range for system of size {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("probe resolution {given} too coarse, need at most {required}")]
    ResolutionTooCoarse { given: f64, required: f64 },

    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    #[error("insufficient data: need at least {needed}, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("unrecognized file format {found:?}, expected {expected:?}")]
    UnknownFormat { found: String, expected: String },

    #[error("invalid file contents: {0}")]
    InvalidFile(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
