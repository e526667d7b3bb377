use std::path::PathBuf;

use epicast_core::Error as CoreError;

/// Failures of a command, each mapped to a process exit status.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error("{path}: unsupported schema version {found} (expected {expected})")]
    UnsupportedVersion {
        path: PathBuf,
        found: String,
        expected: u32,
    },

    #[error("{0}")]
    Data(CoreError),

    #[error("{0}")]
    Fit(CoreError),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Io { .. } => 1,
            CliError::Format { .. } | CliError::UnsupportedVersion { .. } | CliError::Data(_) => 2,
            CliError::Fit(_) => 3,
        }
    }

    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
