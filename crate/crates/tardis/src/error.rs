use std::path::PathBuf;

pub type Result<T, E = CliError> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Invalid configuration; names the offending field.
    #[error("invalid value for `{field}`: {message}")]
    Config { field: String, message: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
    /// Every query point failed.
    #[error("no point could be processed; first failure: {0}")]
    AllFailed(String),
    #[error(transparent)]
    Core(#[from] tardis_core::Error),
}

impl CliError {
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self::Config { field: field.into(), message: message.into() }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io { path: path.into(), source }
    }

    pub fn format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Self::Format { path: path.into(), message: message.into() }
    }

    /// Process exit status: 1 for configuration, 2 for file access and
    /// parsing, 3 when the computation itself failed.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config { .. } => 1,
            Self::Io { .. } | Self::Format { .. } => 2,
            Self::AllFailed(_) | Self::Core(_) => 3,
        }
    }
}
