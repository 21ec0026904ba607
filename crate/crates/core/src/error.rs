use thiserror::Error;

/// Errors raised by the band, oracle and simulation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("sample is empty")]
    EmptySample,
    #[error("invalid value: {0}")]
    InvalidValue(String),
    #[error("invalid delta {delta}: {reason}")]
    InvalidDelta { delta: f64, reason: &'static str },
    #[error("out of range: {0}")]
    OutOfRange(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("delta*m = {0} is below the working regime (needs >= 10)")]
    DeltaMTooSmall(f64),
    #[error("required delta {0} exceeds 1/4")]
    DeltaInfeasible(f64),
    #[error("exact enumeration infeasible: {0}")]
    ExactInfeasible(String),
    #[error("calibration failed: {0}")]
    CalibrationFailed(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid_input(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}

pub(crate) fn out_of_range(msg: impl Into<String>) -> Error {
    Error::OutOfRange(msg.into())
}
