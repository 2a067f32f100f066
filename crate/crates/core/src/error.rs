use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    /// A transition matrix failed the invertibility gate during propagation.
    #[error("propagation failed at level {level}, substep {substep}: {reason}")]
    Propagation {
        level: usize,
        substep: usize,
        reason: String,
    },

    /// The fronts do not support a time surface (non-nested, degenerate, ...).
    #[error("structural error in band {band}: {reason}")]
    Structural { band: usize, reason: String },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("budget exceeded: {needed} direction-steps requested, cap is {cap}")]
    Budget { needed: u128, cap: u128 },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn dim(expected: usize, got: usize) -> Self {
        Error::Dimension { expected, got }
    }
}
