use thiserror::Error;

/// Errors raised by the multipole routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("invalid mode (l={l}, m={m}): {reason}")]
    InvalidMode { l: i64, m: i64, reason: &'static str },

    #[error("grid exactness degree {grid} is below the required degree {required}")]
    GridTooCoarse { required: usize, grid: usize },

    #[error("inconsistent field samples: {0}")]
    Samples(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
