use std::io;
use std::path::PathBuf;

use nptmark_core::Error as CoreError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{0}")]
    Format(String),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] CoreError),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(msg: impl Into<String>) -> Self {
        Error::Format(msg.into())
    }

    /// Process exit status: 2 for usage, configuration and I/O problems, 3 for
    /// numerical failures, 4 when the quasi-blind tamper check trips.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } | Error::Format(_) | Error::Usage(_) => 2,
            Error::Core(e) => match e {
                CoreError::TamperSuspected { .. } => 4,
                CoreError::ConvergenceFailure { .. }
                | CoreError::RankDeficient { .. }
                | CoreError::Degenerate
                | CoreError::NothingEmbedded
                | CoreError::DetectionFailure
                | CoreError::UndefinedMetric(_) => 3,
                _ => 2,
            },
        }
    }
}
