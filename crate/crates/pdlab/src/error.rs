use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument is outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The parameter regime is valid but not supported by this operation.
    #[error("unsupported regime: {0}")]
    UnsupportedRegime(String),

    /// A structural limit would be exceeded (enumeration size, degree cap, ...).
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    /// A numerical routine failed to reach its target accuracy.
    #[error("numeric failure: {0}")]
    Numeric(String),

    /// A stochastic routine produced an invalid state or hit a retry cap.
    #[error("simulation failure at step {step}: {msg}")]
    Simulation { step: usize, msg: String },

    /// Malformed textual input (polynomial expressions, CLI values).
    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
