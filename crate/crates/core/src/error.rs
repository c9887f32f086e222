use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("degenerate variance: noise variance plus cavity variance is zero")]
    DegenerateVariance,

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("quadrature: integrand not finite at node {node}")]
    NonFiniteIntegrand { node: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("fit: {0}")]
    Fit(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
