use std::fmt;

use thiserror::Error;

/// A violated modelling assumption on the input data, tagged with the
/// condition it maps to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub condition: &'static str,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}", self.condition, self.message)
    }
}

#[derive(Debug, Error)]
pub enum SpeError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("assumption violation: {}", join(.0))]
    AssumptionViolation(Vec<Violation>),

    #[error("blow-up detected at t = {t}: {reason}")]
    Blowup { t: f64, reason: String },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl SpeError {
    /// Stable machine-readable kind, used by the CLI error record and the C ABI.
    pub fn kind(&self) -> &'static str {
        match self {
            SpeError::InvalidArgument(_) => "invalid-argument",
            SpeError::InvalidData(_) => "invalid-data",
            SpeError::AssumptionViolation(_) => "assumption-violation",
            SpeError::Blowup { .. } => "blow-up",
            SpeError::Parse(_) => "parse-error",
            SpeError::Io(_) => "io-error",
        }
    }
}

fn join(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

pub type Result<T> = std::result::Result<T, SpeError>;

pub(crate) fn invalid_arg<T>(msg: impl Into<String>) -> Result<T> {
    Err(SpeError::InvalidArgument(msg.into()))
}
