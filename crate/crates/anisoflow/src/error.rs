//! Error type shared across the crate.

use thiserror::Error;

/// Errors surfaced by grid construction, operator inversion, and the solvers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid size n={0}: need a power of two >= 4")]
    InvalidGrid(usize),

    #[error("config error at `{key}`: {msg}")]
    Config { key: String, msg: String },

    #[error("hypothesis (H) failed: {0}")]
    Hypothesis(String),

    #[error("singular viscous symbol at k=({0},{1},{2})")]
    SingularSymbol(i64, i64, i64),

    #[error("negative density: min rho = {min:e} is below -pos_tol = -{pos_tol:e}")]
    NegativeDensity { min: f64, pos_tol: f64 },

    #[error("multiplier m(k) is undefined at k=0 (acts on mean-zero fields only)")]
    ZeroMode,

    #[error("Mihlin coefficients must be positive, got ({0}, {1}, {2})")]
    NonpositiveCoefficient(f64, f64, f64),

    #[error("invalid bootstrap exponent alpha={alpha}: {msg}")]
    InvalidAlpha { alpha: f64, msg: String },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("field dump format error: {0}")]
    FieldFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
