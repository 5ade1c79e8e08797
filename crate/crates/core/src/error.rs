use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A point, torus or region lies outside the set where an object is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// Parameters are inconsistent or out of their documented ranges.
    #[error("configuration error: {0}")]
    Configuration(String),

    /// Computed data contradicts a structural fact (e.g. a large negative-power
    /// coefficient on a disc axis).
    #[error("data inconsistency: {0}")]
    DataInconsistency(String),

    /// A requested tolerance cannot be met inside the coefficient box.
    #[error("box N={box_n} too small: tail beyond the box is {beyond:e}, needs < {needed:e}")]
    BoxTooSmall { box_n: usize, beyond: f64, needed: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Configuration(msg.into())
    }
}
