use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed arguments: wrong lengths, bad indices, invalid parameters.
    #[error("invalid input: {0}")]
    Input(String),
    /// A state that violates its own invariants (normalization, layout).
    #[error("invalid state: {0}")]
    InvalidState(String),
    /// Parameters outside the physical (normalizable) region.
    #[error("unphysical state: {0}")]
    Unphysical(String),
    #[error("non-finite integrand value at node {node:?}")]
    NonFinite { node: Vec<f64> },
    #[error("numerical failure: {0}")]
    Numeric(String),
    #[error("degenerate state: {0}")]
    Degenerate(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn input<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Input(msg.into()))
}
