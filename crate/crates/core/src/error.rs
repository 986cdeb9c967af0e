use thiserror::Error;

/// Errors reported by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("input is not even: {0}")]
    NonEvenInput(String),
    #[error("negative mass or density: {0}")]
    NegativeMass(String),
    #[error("sample grid mismatch: expected {expected}, got {got}")]
    GridMismatch { expected: usize, got: usize },
    #[error("measure is not sampling at this resolution (smallest eigenvalue {min_eig:.3e})")]
    NotSampling { min_eig: f64 },
    #[error("matrix is not positive definite (pivot {pivot} = {value:.3e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },
    #[error("matrix is singular to working precision")]
    SingularMatrix,
    #[error("mass function decreases by {drop:.3e} at r = {r}")]
    NonMonotoneMass { r: f64, drop: f64 },
    #[error("symbol is not real: kernel asymmetry {0:.3e}")]
    NonRealSymbol(f64),
    #[error("matrix is not persymmetric: defect {0:.3e}")]
    NotPersymmetric(f64),
    #[error("operation needs a uniform grid (cell widths differ by {0:.3e})")]
    NonUniformGrid(f64),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
