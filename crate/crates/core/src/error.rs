use thiserror::Error;

/// Errors raised by the library surface.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("index {index} out of range (limit {limit})")]
    IndexOutOfRange { index: usize, limit: usize },
    #[error("unknown constellation label `{0}`")]
    UnknownConstellation(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("search space of {0} leaves exceeds the exhaustive guard")]
    SizeGuard(u128),
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("prefix-norm state space exceeded cap of {0} states")]
    StateOverflow(usize),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
