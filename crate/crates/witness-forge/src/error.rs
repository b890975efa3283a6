//! Error type shared by all modules.

use thiserror::Error;

#[derive(Error, Debug)]
pub enum Error {
    #[error("duplicate factor label {0}")]
    DuplicateLabel(String),

    #[error("unknown factor label {0}")]
    UnknownLabel(String),

    #[error("cannot trace out every factor; use trace() for the scalar")]
    CannotTraceAll,

    #[error("new factor order is not a permutation of the existing labels")]
    NotAPermutation,

    #[error("operator is not Hermitian: max |M - M^dag| = {deviation:.3e} exceeds {tolerance:.3e}")]
    NotHermitian { deviation: f64, tolerance: f64 },

    #[error("bad dimension {0}: factor dimensions must be >= 2")]
    BadDimension(usize),

    #[error("bad parameter: {0}")]
    BadParameter(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("operator is not positive semidefinite (min eigenvalue {min_eig:.3e})")]
    NotPsd { min_eig: f64 },

    #[error("wrong party count: expected {expected}, got {got}")]
    WrongPartyCount { expected: usize, got: usize },

    #[error("parameters outside the proven certificate range: {0}")]
    OutOfProvenRange(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("operator fails its PPT certificate on cut {cut} (min eigenvalue {min_eig:.3e})")]
    NotPpt { cut: String, min_eig: f64 },

    #[error("wrong dimensions: {0}")]
    WrongDimensions(String),

    #[error("bad sweep spec: {0}")]
    BadSpec(String),

    #[error("eigensolver failed: reconstruction residual {residual:.3e} exceeds {bound:.3e}")]
    EigenFailure { residual: f64, bound: f64 },

    #[error("internal numerical inconsistency: {0}")]
    Inconsistency(String),

    #[error("malformed operator file: {0}")]
    MalformedFile(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
