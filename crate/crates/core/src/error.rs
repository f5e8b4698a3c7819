use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("regime error: {0}")]
    Regime(String),

    #[error("training infeasible: coherence length {l} must exceed transmit antennas {t}")]
    TrainingInfeasible { t: usize, l: f64 },

    #[error("usage error: {0}")]
    Usage(String),

    /// The adaptive quadrature ran out of budget; the best estimate is attached.
    #[error("quadrature did not converge: estimate {estimate:e} with error estimate {error_estimate:e}")]
    Quadrature { estimate: f64, error_estimate: f64 },

    #[error("consistency error: {0}")]
    Consistency(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn dimension(msg: impl Into<String>) -> Self {
        Error::Dimension(msg.into())
    }
}
