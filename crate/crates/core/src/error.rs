use thiserror::Error;

/// Errors raised by the simulation and analysis routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("system size N={n} exceeds the {what} cap of {cap}")]
    SizeCap { n: usize, cap: usize, what: &'static str },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("time {t} lies outside the protocol window [0, {end}]")]
    OutsideWindow { t: f64, end: f64 },

    #[error("matrix is not Hermitian (residual {residual:e})")]
    NotHermitian { residual: f64 },

    #[error("proposal matrix is not symmetric (residual {residual:e})")]
    AsymmetricProposal { residual: f64 },

    #[error("chain violates detailed balance (residual {residual:e})")]
    NotReversible { residual: f64 },

    #[error("subset must be nonempty and proper (size {size} of {total})")]
    ImproperSubset { size: usize, total: usize },

    #[error("energy level {k} does not exist ({levels} distinct levels)")]
    LevelOutOfRange { k: usize, levels: usize },

    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
