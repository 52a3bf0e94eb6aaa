use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Error, Debug)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("dense expansion of {needed} visibles exceeds cap {cap}")]
    DenseCapExceeded { needed: usize, cap: usize },

    #[error("synthesis failed: {0}")]
    Synthesis(String),

    #[error("unsupported structure: {0}")]
    Unsupported(String),

    #[error("no closed form fits the sign data: rank {rank} of {rows} rows is consistent, row {bad_row} is not")]
    FitInfeasible { rank: usize, rows: usize, bad_row: usize },

    #[error("zero-norm state: {0}")]
    ZeroNorm(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
