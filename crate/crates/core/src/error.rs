//! Crate-wide error type.
//!
//! Structural misuse (mismatched lattices, invalid parameters, malformed
//! files) is reported through [`Error`]; numerical failures that a caller may
//! want to inspect (non-invertible operator, insufficient decay data) carry
//! enough context to act on.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Two values built over different lattices / moduli were combined.
    #[error("lattice mismatch: {0}")]
    LatticeMismatch(String),

    /// A constructor precondition failed (even N, non-divisor step, ...).
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Window is numerically zero or otherwise unusable.
    #[error("degenerate window: {0}")]
    DegenerateWindow(String),

    /// The window does not generate a frame on the requested lattice.
    #[error("not a frame: {0}")]
    NotAFrame(String),

    /// An operator could not be inverted at the requested tolerance.
    #[error("operator not invertible (relative tolerance {rtol:.3e}): {detail}")]
    NotInvertible { rtol: f64, detail: String },

    /// Too little data to fit or verify a decay profile.
    #[error("insufficient support: {0}")]
    InsufficientSupport(String),

    /// A file could not be parsed; `line` is 1-based.
    #[error("parse error at {path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
