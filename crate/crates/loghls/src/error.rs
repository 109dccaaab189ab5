use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Core(#[from] loghls_core::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("config {path}: {message}")]
    Config { path: PathBuf, message: String },
    #[error("cannot parse {what} from {input:?}")]
    Parse { what: &'static str, input: String },
    #[error("malformed density file at line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("{0}")]
    Usage(String),
    /// A checked property did not hold; reported with exit code 2.
    #[error("assertion failed: {0}")]
    Assertion(String),
}

pub type Result<T> = std::result::Result<T, HarnessError>;

impl HarnessError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        HarnessError::Io { path: path.into(), source }
    }

    pub fn parse(what: &'static str, input: impl Into<String>) -> Self {
        HarnessError::Parse { what, input: input.into() }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Assertion(_) => 2,
            _ => 1,
        }
    }
}
