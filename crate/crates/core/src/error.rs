use thiserror::Error;

/// Errors raised by the simulation library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid chain parameters: {0}")]
    InvalidParams(String),

    #[error("basis index {index} out of range for {dim}-dimensional space")]
    BasisOutOfRange { index: usize, dim: usize },

    #[error("spin index {spin} out of range for a chain of {n_spins} spins")]
    SpinOutOfRange { spin: usize, n_spins: usize },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid pulse: {0}")]
    InvalidPulse(String),

    #[error("state not normalized: |norm^2 - 1| = {deviation:e}")]
    NotNormalized { deviation: f64 },

    #[error("state is in the {actual} picture, expected the {expected} picture")]
    WrongPicture {
        expected: &'static str,
        actual: &'static str,
    },

    #[error("norm drift {drift:e} at t = {t} us exceeds tolerance {tolerance:e}; step size too coarse")]
    NormDrift { t: f64, drift: f64, tolerance: f64 },

    #[error("oracle slice count too small: {0}")]
    SliceCountTooSmall(String),

    #[error("empty pulse sequence")]
    EmptySequence,
}

impl Error {
    /// True for failures of the numerical integration itself, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NormDrift { .. } | Error::SliceCountTooSmall(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
