//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("field contains non-finite values")]
    NonFinite,

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("input must have zero transverse mean, got integral {integral:.3e}")]
    NotMeanFree { integral: f64 },

    #[error(
        "fixed-point iteration did not converge after {iterations} iterations \
         (last relative update {last_update:.3e}, update trace {trace:?})"
    )]
    NoConvergence {
        iterations: usize,
        last_update: f64,
        trace: Vec<f64>,
    },

    #[error("evolution aborted at t = {t}: {reason}")]
    Unstable { t: f64, reason: String },

    #[error("snapshot format error: {0}")]
    Snapshot(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
