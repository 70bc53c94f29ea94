use thiserror::Error;

/// Error type shared by all modules of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown factor: {0}")]
    UnknownFactor(String),
    #[error("unknown entry: {0}")]
    UnknownEntry(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("bad kernel: {0}")]
    BadKernel(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("index out of range: {0}")]
    OutOfRange(String),
    #[error("structure error: {0}")]
    Structure(String),
    #[error("result too large: {0}")]
    TooLarge(String),
    #[error("subset enumeration blowup: {0}")]
    Blowup(String),
    #[error("singular covariance: {0}")]
    SingularCovariance(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("schema error: {0}")]
    Schema(String),
}

pub type Result<T> = std::result::Result<T, Error>;
