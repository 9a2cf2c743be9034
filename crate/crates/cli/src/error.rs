use std::path::PathBuf;

use thiserror::Error;

/// Process exit codes.
pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    /// Schema violation; `path` is the JSON field path (`$` for the root).
    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error(transparent)]
    Model(#[from] radrec_core::Error),

    #[error("invalid arguments: {0}")]
    Usage(String),

    /// A verification suite ran but at least one check failed.
    #[error("diagnostic failure: {0}")]
    Diagnostic(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Config {
            path: path.into(),
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        use radrec_core::Error as E;
        match self {
            CliError::Config { .. } | CliError::Usage(_) => EXIT_VALIDATION,
            CliError::Io { .. } => EXIT_IO,
            CliError::Diagnostic(_) => EXIT_NUMERICAL,
            CliError::Model(e) => match e.root() {
                E::SingularResolvent { .. }
                | E::QuasiDegenerate { .. }
                | E::ResidualSingularity { .. }
                | E::ExtrapolationFailed(_) => EXIT_NUMERICAL,
                _ => EXIT_VALIDATION,
            },
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
