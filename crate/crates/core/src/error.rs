use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {field} {reason}")]
    Config { field: String, reason: String },

    #[error("control amplitude vanishes at sample ({ix}, {iy}) = ({x}, {y}); ratio is singular")]
    SingularRatio { ix: usize, iy: usize, x: f64, y: f64 },

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("{what} [{lo}, {hi}] lies outside the grid extent [{min}, {max}]")]
    OutOfBounds {
        what: &'static str,
        lo: f64,
        hi: f64,
        min: f64,
        max: f64,
    },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("eigensolver failed: {0}")]
    Eigensolver(String),

    #[error("time step dt = {dt} exceeds the accuracy bound {bound} (dt * omega_max <= {budget})")]
    TimeStep { dt: f64, bound: f64, budget: f64 },

    #[error("non-finite wavefunction value detected at step {step}")]
    NonFinite { step: usize },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message} (line {line})")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{path}: malformed field file: {message}")]
    Format { path: PathBuf, message: String },
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }
}
