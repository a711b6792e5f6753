use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("non-numeric cell {value:?} at row {row}, column {column}")]
    NonNumeric {
        row: usize,
        column: String,
        value: String,
    },

    #[error("target column {0} not present in header")]
    MissingTarget(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("zero vector cannot be amplitude-encoded")]
    ZeroVector,

    #[error("matrix is not positive semidefinite (minimum eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("singular spectrum transform: Schmidt coefficient {index} is zero with chi = 0")]
    SingularTransform { index: usize },

    #[error("singular linear system")]
    SingularSystem,

    #[error("trained state has zero norm")]
    ZeroState,

    #[error("quadrature grid too coarse: {0}")]
    GridTooCoarse(String),

    #[error("leakage {leakage:e} exceeds threshold {threshold:e}")]
    Leakage { leakage: f64, threshold: f64 },
}
