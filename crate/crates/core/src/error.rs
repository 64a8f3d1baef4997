use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("empty sample")]
    EmptySample,

    #[error("non-finite value at position {index} of sample")]
    NonFinite { index: usize },

    #[error("{what} out of domain: {value}")]
    Domain { what: &'static str, value: f64 },

    #[error("invalid step quantile: {0}")]
    InvalidQuantile(String),

    #[error("index undefined for identical distributions")]
    IdenticalDistributions,

    #[error("variance undefined: identical empirical distributions")]
    VarianceUndefined,

    #[error("zero sample variance")]
    ZeroVariance,

    #[error("bootstrap failed: {0}")]
    Bootstrap(String),

    #[error("invalid configuration: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn domain(what: &'static str, value: f64) -> Self {
        Error::Domain { what, value }
    }
}
