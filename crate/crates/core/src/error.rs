use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid Cantor specification: {0}")]
    InvalidSpec(String),

    #[error("level {requested} exceeds construction depth {depth}")]
    LevelOutOfRange { requested: usize, depth: usize },

    #[error("non-finite sample at index {index}")]
    NonFinite { index: usize },

    #[error("point |z| = {radius} lies outside the resolvable disk |z| <= {max_radius} for this grid")]
    PrecisionMargin { radius: f64, max_radius: f64 },

    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),

    #[error("numerical resolution failure: {0}")]
    Resolution(String),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
