use std::io;

use thiserror::Error;

/// Every failure the laboratory reports.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid grid, field shape or parameter combination.
    #[error("configuration error: {0}")]
    Config(String),

    /// A line of an experiment config could not be accepted.
    #[error("config line {line}: key `{key}`: {msg}")]
    ConfigKey { line: usize, key: String, msg: String },

    #[error("size mismatch: expected {expected}, got {got}")]
    SizeMismatch { expected: usize, got: usize },

    #[error("rank mismatch: {0}")]
    Rank(String),

    /// Vorticity with a non-zero mean has no periodic velocity.
    #[error("vorticity has non-zero mean ({0:e}); no periodic Biot-Savart inverse")]
    NonZeroMean(f64),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("blow-up at t = {t}: {reason}")]
    BlowUp { t: f64, reason: String },

    /// det(I + grad l) fell below the guard somewhere on the grid.
    #[error("map not invertible: min |det grad A| = {min_det:e} (guard {guard})")]
    Invertibility { min_det: f64, guard: f64 },

    #[error("overflow guard: {what} (largest admissible {max_admissible:e})")]
    Overflow { what: String, max_admissible: f64 },

    #[error("snapshot: {0}")]
    Snapshot(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
