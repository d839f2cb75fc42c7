use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid function id {0}: expected 1..=24")]
    InvalidFunction(u32),

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("invalid point: {0}")]
    InvalidPoint(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("numerical breakdown: {0}")]
    NumericalBreakdown(String),

    #[error("degenerate CMA-ES state: {0}")]
    DegenerateState(String),

    #[error("invalid sample set: {0}")]
    InvalidSample(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("empty data: {0}")]
    EmptyData(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("model format: {0}")]
    ModelFormat(String),
}

impl Error {
    /// True for failures caused by the numerics rather than by the caller.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NumericalBreakdown(_) | Error::DegenerateState(_))
    }
}
