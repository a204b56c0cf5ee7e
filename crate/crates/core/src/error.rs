use thiserror::Error;

/// Errors raised by the separability toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not Hermitian (max deviation {deviation:e} exceeds {tol:e})")]
    NotHermitian { deviation: f64, tol: f64 },

    #[error("matrix is not unitary (max deviation {deviation:e})")]
    NotUnitary { deviation: f64 },

    #[error("matrix has a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("parameter out of range: {0}")]
    ParamOutOfRange(String),

    #[error("density-state invariant violated: {0}")]
    InvariantViolation(String),

    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    #[error("no sign change of the detection flag between {lo} and {hi}")]
    NoSignChange { lo: f64, hi: f64 },

    #[error("refusing to emit an empty record sequence")]
    EmptyRecords,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
