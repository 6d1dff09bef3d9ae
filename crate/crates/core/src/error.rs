use thiserror::Error;

/// Errors raised by the spectral laboratory.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    /// Malformed or out-of-range input.
    #[error("invalid input: {0}")]
    Input(String),

    /// A scalar map was evaluated outside of where it is finite.
    #[error("function is not finite at {at}: {detail}")]
    Domain { at: f64, detail: String },

    /// A calling contract was violated (e.g. `f(0) != 0` for a trace functional).
    #[error("contract violated: {0}")]
    Contract(String),

    /// An iterative numerical procedure failed.
    #[error("numerical failure in {routine}: {detail}")]
    Numerical { routine: &'static str, detail: String },
}

pub type Result<T> = std::result::Result<T, LabError>;

pub(crate) fn input<T>(msg: impl Into<String>) -> Result<T> {
    Err(LabError::Input(msg.into()))
}

pub(crate) fn numerical(routine: &'static str, detail: impl Into<String>) -> LabError {
    LabError::Numerical {
        routine,
        detail: detail.into(),
    }
}
