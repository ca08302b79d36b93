use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("Walsh index overflow: {0}")]
    IndexOverflow(String),

    #[error("precision too short: index {index} needs at least {index} digits, have {precision}")]
    PrecisionTooShort { index: u32, precision: u32 },

    #[error("enumeration budget exceeded: {bits} free bits referenced, limit is {limit}")]
    BudgetExceeded { bits: u32, limit: u32 },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("skewness and kurtosis are undefined when the variance estimate is zero")]
    ZeroVariance,

    #[error("search exhausted: {0}")]
    SearchExhausted(String),
}

pub type Result<T> = std::result::Result<T, Error>;
