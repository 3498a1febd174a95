use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by eslab operations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("domain error in branch `{branch}`: {reason}")]
    Domain { branch: &'static str, reason: String },

    #[error("enumeration budget exceeded: {needed:.3e} points requested, limit {limit:.0e}")]
    Budget { needed: f64, limit: f64 },

    #[error("frequency {m:?} exceeds the accuracy cap |m|_inf <= 2^30")]
    Range { m: Vec<i64> },

    #[error("singular input: {0}")]
    Singular(String),

    #[error("numeric failure at n = {n}: {reason}")]
    Numeric { n: i64, reason: String },

    #[error("config error in field `{field}`{}: {reason}", line.map(|l| format!(" (line {l})")).unwrap_or_default())]
    Config {
        field: String,
        line: Option<usize>,
        reason: String,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn param(msg: impl Into<String>) -> Error {
    Error::Parameter(msg.into())
}
