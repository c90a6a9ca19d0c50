use std::process::ExitCode;

use cavity_cyclicity::Error as CoreError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad invocation, config or input file.
    #[error("{0}")]
    Usage(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] CoreError),
}

impl CliError {
    pub fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    /// 2 for usage and input problems, 1 when the analysis itself fails.
    pub fn exit_code(&self) -> ExitCode {
        let usage = match self {
            CliError::Usage(_) | CliError::Io { .. } => true,
            CliError::Core(e) => matches!(
                e,
                CoreError::InvalidParameter { .. }
                    | CoreError::Format(_)
                    | CoreError::Io(_)
                    | CoreError::Csv(_)
                    | CoreError::Json(_)
            ),
        };
        ExitCode::from(if usage { 2 } else { 1 })
    }
}
