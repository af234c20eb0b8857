use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("extrapolation: {0}")]
    Extrapolation(String),

    #[error("quadrature accuracy not reached: {0}")]
    Accuracy(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("non-integrable weight: {0}")]
    NonIntegrable(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
