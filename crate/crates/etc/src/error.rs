use std::path::PathBuf;

use crate::vox::FormatError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] etc_core::Error),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {source}", path.display())]
    Format { path: PathBuf, source: FormatError },
    #[error("invalid report: {0}")]
    Schema(String),
    #[error("{0}")]
    Usage(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// Process exit status: 1 for solver failures, 2 for bad input or
    /// configuration, 3 for anything touching the file system.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Core(etc_core::Error::Breakdown { .. }) | Error::Core(etc_core::Error::NotSpd) => 1,
            Error::Core(_) | Error::Usage(_) => 2,
            Error::Io { .. } | Error::Format { .. } | Error::Schema(_) => 3,
        }
    }
}
