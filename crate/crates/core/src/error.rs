use std::io;

use thiserror::Error;

/// Errors produced anywhere in the slide-generation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed input: {0}")]
    MalformedInput(String),
    #[error("document `{0}` contains no sentences")]
    EmptyDocument(String),
    #[error("embedding line {line}: expected {expected} values, found {found}")]
    DimensionMismatch {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("loss evaluated to a non-finite value ({0})")]
    NonFiniteLoss(f64),
    #[error("not a checkpoint file (bad magic)")]
    BadMagic,
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("cannot encode an empty sentence")]
    EmptySentence,
    #[error("{found} sentences exceed the configured maximum of {max}")]
    TooManySentences { found: usize, max: usize },
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("selection problem too large: {0}")]
    ProblemTooLarge(String),
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("unknown {kind} `{name}` (available: {available})")]
    UnknownStrategy {
        kind: &'static str,
        name: String,
        available: String,
    },
}

impl Error {
    /// True for errors caused by bad user input or configuration rather
    /// than by a failure while running.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::MalformedInput(_)
                | Error::EmptyDocument(_)
                | Error::DimensionMismatch { .. }
                | Error::InvalidConfig(_)
                | Error::UnknownStrategy { .. }
                | Error::LengthMismatch { .. }
                | Error::ShapeMismatch(_)
        )
    }
}

impl From<serde_json::Error> for Error {
    fn from(err: serde_json::Error) -> Self {
        if err.is_io() {
            Error::Io(err.into())
        } else {
            Error::MalformedInput(err.to_string())
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
