use thiserror::Error;

/// Errors raised by the toolkit's numerical and protocol routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("matrix is not PSD (min eigenvalue {0:e})")]
    NotPsd(f64),

    #[error("state is not normalized (norm {0})")]
    NotNormalized(f64),

    #[error("invalid density operator: {0}")]
    InvalidState(String),

    #[error("invalid POVM: {0}")]
    InvalidPovm(String),

    #[error("{0} is not prime")]
    NotPrime(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("missing setting (x1={x1}, x2={x2}, y={y})")]
    MissingSetting { x1: usize, x2: usize, y: u8 },

    #[error("no reference value for (n={n}, m={m}, d={d})")]
    NoReference { n: usize, m: usize, d: usize },

    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
