use std::fmt;

/// Errors reported by the solver library.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// An argument was outside the operation's domain.
    Domain(String),
    /// An exhaustive-enumeration request exceeded the configured cap.
    CapExceeded { requested: usize, cap: usize },
    /// A success-conditioned quantity was requested for a strategy that never wins.
    UndefinedConditional,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::CapExceeded { requested, cap } => {
                write!(f, "n = {requested} exceeds the enumeration cap {cap}")
            }
            Error::UndefinedConditional => {
                write!(
                    f,
                    "conditional statistic undefined: the strategy has zero win probability"
                )
            }
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;
