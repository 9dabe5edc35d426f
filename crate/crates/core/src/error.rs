use thiserror::Error;

/// Errors raised by the numerical core.
///
/// Variants split into two groups that the CLI maps onto distinct exit
/// codes: precondition violations (bad shapes, parameters out of range) and
/// numerical failures (non-convergence, truncation leakage).
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("state has Schmidt rank < 2; nothing to witness")]
    SchmidtRankTooLow,

    #[error("{what} did not converge after {iterations} iterations")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
    },

    #[error("truncation insufficient: {0}")]
    Truncation(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    /// True for errors caused by bad inputs rather than by the numerics.
    pub fn is_precondition(&self) -> bool {
        matches!(
            self,
            Error::Shape(_)
                | Error::NotSquare { .. }
                | Error::NotHermitian { .. }
                | Error::NonFinite { .. }
                | Error::InvalidParameter(_)
                | Error::SchmidtRankTooLow
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
