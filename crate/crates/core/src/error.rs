use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KlmsError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A Gaussian of width `sigma` is not an element of the RKHS of width `sigma_star`.
    #[error("kernel size {sigma} is not a member of H(sigma*={sigma_star}): need sigma > sigma*/sqrt(2)")]
    NotAMember { sigma: f64, sigma_star: f64 },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, KlmsError>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(KlmsError::InvalidArgument(msg.into()))
}
