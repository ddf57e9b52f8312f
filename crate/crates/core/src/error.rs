use std::io;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid index set: {0}")]
    InvalidIndexSet(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("column {column} has norm {norm}, expected unit norm")]
    NonUnitColumn { column: usize, norm: f64 },

    #[error("dual point violates the dual constraints (max ratio {0})")]
    InfeasibleDual(f64),

    #[error("lambda = {lambda} exceeds lambda* = {lambda_star}; the solution is zero")]
    TrivialRegime { lambda: f64, lambda_star: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("did not converge within {iterations} iterations (gap {gap:e})")]
    NoConvergence { iterations: usize, gap: f64 },

    #[error("incompatible configuration: {0}")]
    Incompatible(String),

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}
