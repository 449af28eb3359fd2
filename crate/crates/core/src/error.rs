use thiserror::Error;

/// Errors raised across the simulation, measure-flow and diagnostic layers.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter violates its documented range. `key` is the config key.
    #[error("invalid parameter `{key}`: {reason}")]
    Parameter { key: &'static str, reason: String },

    #[error("degenerate network: mean degree is zero")]
    DegenerateNetwork,

    #[error("path {path} became invalid at step {step}: {reason}")]
    Path {
        path: u64,
        step: usize,
        reason: String,
    },

    #[error("ensemble rejected: {invalid} of {total} paths invalid (limit 1%)")]
    Ensemble { invalid: usize, total: usize },

    #[error("unsupported mode: {0}")]
    Unsupported(String),

    #[error("volatility vanished at s = {s} while evaluating a Girsanov kernel")]
    Degeneracy { s: f64 },

    #[error("numerical routine did not converge: {0}")]
    Numeric(String),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param(key: &'static str, reason: impl Into<String>) -> Error {
    Error::Parameter {
        key,
        reason: reason.into(),
    }
}
