//! Harness-wide error type, classified by the exit code it maps to:
//! malformed input is 2, a violated stability/observability precondition
//! is 3, and everything else (I/O, internal failures) is 1.

use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}:{line}:{col}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        col: usize,
        msg: String,
    },
    #[error("{path}: field `{field}`: {msg}")]
    Invalid {
        path: PathBuf,
        field: String,
        msg: String,
    },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("{0}")]
    Runtime(String),
}

impl HarnessError {
    pub fn exit_code(&self) -> u8 {
        match self {
            HarnessError::Parse { .. } | HarnessError::Invalid { .. } => 2,
            HarnessError::Precondition(_) => 3,
            HarnessError::Io { .. } | HarnessError::Runtime(_) => 1,
        }
    }

    pub fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Self {
        let path = path.into();
        move |source| HarnessError::Io { path, source }
    }
}
