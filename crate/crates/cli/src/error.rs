use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, missing files, malformed artifacts.
    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Core(#[from] monosim::Error),

    #[error("cannot write {path}: {source}")]
    Write {
        path: String,
        source: std::io::Error,
    },
}

impl CliError {
    /// 2 for input and usage problems, 3 for numeric and training failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Write { .. } => 2,
            CliError::Core(e) if e.is_input_error() => 2,
            CliError::Core(monosim::Error::Unsupported(_) | monosim::Error::Io(_)) => 2,
            CliError::Core(_) => 3,
        }
    }
}
