use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("non-finite value after step {step}")]
    NonFinite { step: usize },

    #[error("zero pivot in tridiagonal elimination at row {row}")]
    ZeroPivot { row: usize },

    #[error("series mismatch: {0}")]
    Mismatch(String),

    #[error("equilibria do not exist: {0}")]
    NoEquilibria(String),

    #[error("state ({ni}, {nu}) is not an equilibrium (relative residual {residual:.3e})")]
    NotEquilibrium { ni: f64, nu: f64, residual: f64 },

    #[error("wave speed: snapshot {index} (t = {time}): {reason}")]
    WaveSpeed {
        index: usize,
        time: f64,
        reason: String,
    },

    #[error("simulation at epsilon = {epsilon} failed: {source}")]
    Sweep {
        epsilon: f64,
        #[source]
        source: Box<Error>,
    },

    /// `line` is 0 when the offending value is a default.
    #[error("{}`{key}`: {message}", config_location(*.line))]
    Config {
        line: usize,
        key: String,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

fn config_location(line: usize) -> String {
    if line == 0 {
        "default ".to_string()
    } else {
        format!("line {line}: ")
    }
}
