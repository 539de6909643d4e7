use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("matrix is not Hermitian (max asymmetry {0:e})")]
    NotHermitian(f64),
    #[error("QL iteration did not converge within {0} sweeps")]
    NoConvergence(usize),
    #[error("malformed input: {0}")]
    Format(String),
    #[error("algebra mismatch: {0}")]
    Algebra(String),
    #[error("integral does not converge: {0}")]
    Divergent(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
