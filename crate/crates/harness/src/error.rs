use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid input: {0}")]
    Validation(String),
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },
    #[error("solver failure: {0}")]
    Solver(phasesync::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, HarnessError>;

impl HarnessError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    pub fn parse(path: impl Into<PathBuf>, line: u64, message: impl Into<String>) -> Self {
        Self::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }

    /// Process exit code: 1 validation, 2 solver, 3 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Validation(_) | Self::Parse { .. } => 1,
            Self::Solver(_) => 2,
            Self::Io { .. } => 3,
        }
    }
}

impl From<phasesync::Error> for HarnessError {
    fn from(e: phasesync::Error) -> Self {
        use phasesync::Error as E;
        match e {
            E::NonConvergence { .. } | E::NotFinite(_) => Self::Solver(e),
            other => Self::Validation(other.to_string()),
        }
    }
}
