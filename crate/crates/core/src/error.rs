use crate::access::ModelViolation;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("alphabet mismatch: {0} vs {1}")]
    AlphabetMismatch(u32, u32),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("code distance check failed: minimum distance {0} is below 1/3")]
    CodeDistance(String),
    #[error("empty support")]
    EmptySupport,
    #[error("weights must be positive")]
    NonPositiveWeight,
    #[error("oracle guard exceeded: {0}")]
    Guard(String),
    #[error(transparent)]
    Model(#[from] ModelViolation),
    #[error("format error: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param(msg: impl Into<String>) -> Error {
    Error::Parameter(msg.into())
}
