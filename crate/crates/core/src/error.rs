//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument is outside the domain of the operation.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// 1D data fed to a 2D operation or vice versa.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A location fell outside a tabulated pattern's grid.
    #[error("out of domain: {0}")]
    OutOfDomain(String),

    /// A matrix or node set is rank deficient where full rank is required.
    #[error("rank deficient: {0}")]
    RankDeficient(String),

    /// A lemma or theorem hypothesis does not hold; the message names the
    /// failed inequality.
    #[error("precondition failed: {0}")]
    PreconditionFailed(String),

    /// A construction certified by theory failed its numeric check. This is
    /// never expected; it would falsify the underlying result.
    #[error("certification failure: {0}")]
    CertificationFailure(String),

    /// Input file does not match the documented schema.
    #[error("schema mismatch: missing columns {0:?}")]
    SchemaMismatch(Vec<String>),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("config error: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
