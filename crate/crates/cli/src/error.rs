use std::path::PathBuf;

use thiserror::Error;

/// Process exit codes.
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {message}", path.display())]
    Image { path: PathBuf, message: String },

    #[error("{}: {source}", path.display())]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Core(#[from] ssn_core::Error),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        use ssn_core::Error as E;
        match self {
            CliError::Config(_) | CliError::Json { .. } => EXIT_CONFIG,
            CliError::Io { .. } | CliError::Image { .. } => EXIT_IO,
            CliError::Numerical(_) => EXIT_NUMERICAL,
            CliError::Core(e) => match e {
                E::Io(_) | E::ModelFormat(_) => EXIT_IO,
                E::NonFinite(_) | E::IncompatibleMaps(_) | E::EmptyTrainingSet | E::SingleClass => EXIT_NUMERICAL,
                _ => EXIT_CONFIG,
            },
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
