use std::path::PathBuf;

use thiserror::Error;

use crate::dsl::Diagnostic;

/// Failures of a command line invocation. Usage and I/O problems exit with
/// status 2; rejected inputs and engine failures exit with status 1.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Usage(String),
    #[error("input rejected with {} error(s)", .0.iter().filter(|d| d.is_error()).count())]
    Rejected(Vec<Diagnostic>),
    #[error("{0}")]
    Engine(String),
}

impl Error {
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Io { .. } | Error::Usage(_) => 2,
            Error::Rejected(_) | Error::Engine(_) => 1,
        }
    }

    pub fn engine(e: impl std::fmt::Display) -> Self {
        Error::Engine(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
