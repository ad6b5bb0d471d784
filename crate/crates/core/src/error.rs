use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid Pauli letter {symbol:?} at site {site}")]
    InvalidLetter { site: usize, symbol: char },

    #[error("length mismatch: expected {expected} sites, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("{what} supports at most {limit} sites, got {length}")]
    TooManySites {
        what: &'static str,
        length: usize,
        limit: usize,
    },

    #[error("state has {0} amplitudes, which is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("state is not normalized (norm {0})")]
    NotNormalized(f64),

    #[error("expectation value has imaginary residual {0:e}; phase convention is broken")]
    ImaginaryResidual(f64),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("eigensolver did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("sampling failed: {0}")]
    Sampling(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for errors caused by bad input rather than numerical failure.
    pub fn is_validation(&self) -> bool {
        !matches!(
            self,
            Error::NoConvergence { .. } | Error::ImaginaryResidual(_) | Error::Sampling(_) | Error::Io(_) | Error::Csv(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
