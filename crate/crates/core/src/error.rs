use thiserror::Error;

/// Errors shared across the numerical modules.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("precision guarantee unavailable: {0}")]
    Precision(String),
    #[error("resource guard tripped: {0}")]
    Resource(String),
    #[error("root bracketing failed: {0}")]
    RootBracket(String),
    #[error("degenerate linear system: {0}")]
    Degenerate(String),
    #[error("trajectory does not cover the requested range: {0}")]
    Coverage(String),
    #[error("quadrature did not converge: {0}")]
    QuadratureNonConvergence(String),
    #[error("insufficient data range: {0}")]
    InsufficientRange(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
