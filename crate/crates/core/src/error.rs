//! Error type shared by all gridspin modules.

use thiserror::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong inside the library.
///
/// Variants are deliberately coarse: callers mostly care about the
/// distinction between "the input was malformed" and "the run itself
/// failed" (e.g. a diverging integration).
#[derive(Debug, Error)]
pub enum Error {
    /// Matrix/vector shapes do not line up.
    #[error("dimension mismatch: {context} (expected {expected}, got {got})")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    /// An index is outside the valid range for the object it addresses.
    #[error("index {index} out of range for {context} of length {len}")]
    IndexOutOfRange {
        context: &'static str,
        index: usize,
        len: usize,
    },

    /// A configuration or instance field has an invalid value.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A numeric entry is NaN or infinite where a finite value is required.
    #[error("non-finite value in {context} at position {index}")]
    NonFinite { context: &'static str, index: usize },

    /// The oscillator integration left the configured stability envelope.
    /// Usually means the time step or coupling strength is too large for
    /// the problem at hand.
    #[error(
        "bifurcation dynamics diverged: |x[{index}]| exceeded {bound} at step {step}; \
         reduce the time step or coupling strength"
    )]
    Unstable { index: usize, step: u64, bound: f64 },

    /// Exhaustive enumeration was requested for a problem that is too
    /// large to enumerate.
    #[error("problem has {n} bits; exhaustive search is capped at {max} bits")]
    TooLargeForExhaustive { n: usize, max: usize },

    /// A scheduling instance admits no assignment satisfying its
    /// constraints (e.g. demand exceeding total capacity).
    #[error("infeasible instance: {0}")]
    Infeasible(String),

    /// Malformed serialized data (JSON instance files, CSV series, ...).
    #[error("parse error: {0}")]
    Parse(String),

    /// Underlying I/O failure.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
