use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("{what} is numerically singular at tau = {tau}: min singular value {min_sigma:.3e}")]
    Singular {
        what: String,
        tau: f64,
        min_sigma: f64,
    },
    #[error("quadrature did not converge: {0}")]
    Quadrature(String),
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    #[error("trace extraction failed: {0}")]
    Extraction(String),
    #[error("axial window inadequate: {0}")]
    Window(String),
    #[error("fixed-point iteration diverged: {0}")]
    Divergence(String),
}

pub type Result<T> = std::result::Result<T, Error>;
