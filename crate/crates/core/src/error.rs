use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the channel models, bounds and estimators.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("vector lengths differ: emissions have {emissions}, arrivals have {arrivals}")]
    LengthMismatch { emissions: usize, arrivals: usize },

    #[error("exhaustive enumeration is capped at M = {cap}, got M = {got}")]
    EnumerationCap { cap: usize, got: usize },

    #[error("arrivals are not causally reachable from the emissions (no admissible permutation)")]
    Inadmissible,

    #[error("{op} requires M = {required}, got M = {got}")]
    UnsupportedQuanta {
        op: &'static str,
        required: usize,
        got: usize,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

pub(crate) fn ensure_positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(invalid(
            name,
            format!("must be finite and > 0, got {value}"),
        ))
    }
}
