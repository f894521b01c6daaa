use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid Hilbert space: {0}")]
    InvalidSpace(String),

    #[error("operator is not Hermitian (max |A - A^dagger| entry = {max_asymmetry:.3e})")]
    NotHermitian { max_asymmetry: f64 },

    #[error("space mismatch: expected factors {expected:?}, found {found:?}")]
    SpaceMismatch {
        expected: Vec<usize>,
        found: Vec<usize>,
    },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("state is not normalized (norm = {0})")]
    NotNormalized(f64),

    #[error("variance is negative beyond tolerance: {0:.3e}")]
    NegativeVariance(f64),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("Fock index {index} out of range for truncation dimension {dim}")]
    FockIndexOutOfRange { index: usize, dim: usize },

    #[error("invalid probability vector: {0}")]
    InvalidProbabilities(String),

    #[error(
        "term '{term}' has no weight; fixed QDRIFT sampling needs h_j on every term \
         (use equal-weight sampling or hard-truncation weights)"
    )]
    MissingWeight { term: String },

    #[error("term {term} has nonzero deviation but zero probability: cost is infinite")]
    InfiniteCost { term: usize },

    #[error("operation requires a pure qubit register, found factors {0:?}")]
    NonQubitSpace(Vec<usize>),

    #[error("Pauli string length mismatch: {left} vs {right}")]
    PauliLengthMismatch { left: usize, right: usize },

    #[error("empty shadow set")]
    EmptyShadow,

    #[error("empty Pauli decomposition")]
    EmptyDecomposition,

    #[error("invalid estimator config: {0}")]
    InvalidEstimator(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("resource guard: estimated work {work:.3e} exceeds budget {budget:.3e}")]
    ResourceGuard { work: f64, budget: f64 },

    #[error("invalid fit input: {0}")]
    InvalidFit(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed shadow record stream: {0}")]
    MalformedRecord(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
