use alloc::string::String;
use core::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    DimensionMismatch {
        expected: usize,
        found: usize,
    },
    ParameterCount {
        expected: usize,
        found: usize,
    },
    InvalidDomain(String),
    InvalidTerm(String),
    Parse {
        position: usize,
        message: String,
    },
    /// The generating formula produced a non-finite value inside its box.
    Generation {
        problem: String,
        row: usize,
    },
    DegenerateTarget,
    EmptyData,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::ParameterCount { expected, found } => {
                write!(
                    f,
                    "parameter vector has length {found}, expression has {expected} parameters"
                )
            }
            Error::InvalidDomain(msg) => write!(f, "invalid domain: {msg}"),
            Error::InvalidTerm(msg) => write!(f, "invalid IT term: {msg}"),
            Error::Parse { position, message } => {
                write!(f, "parse error at byte {position}: {message}")
            }
            Error::Generation { problem, row } => write!(
                f,
                "formula of '{problem}' is not finite at sampled row {row} (box transcription bug?)"
            ),
            Error::DegenerateTarget => write!(f, "target variable has zero variance"),
            Error::EmptyData => write!(f, "dataset has no rows"),
        }
    }
}

impl core::error::Error for Error {}
