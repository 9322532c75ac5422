use thiserror::Error;

pub type Result<T, E = CliError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    /// A parsed value violates a physical or grid invariant.
    #[error("{0}")]
    Validation(String),

    #[error(transparent)]
    Core(#[from] marle_core::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        CliError::Parse { line, message: message.into() }
    }

    /// Process exit status: 2 for numerical failures, 1 for everything else.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_numeric() => 2,
            _ => 1,
        }
    }
}

/// Invariant violations from the core become validation errors carrying the
/// core's message alone.
pub(crate) fn validation(e: marle_core::Error) -> CliError {
    match e {
        marle_core::Error::InvalidConstants(msg) | marle_core::Error::InvalidGridConfig(msg) => {
            CliError::Validation(msg.to_string())
        }
        other => CliError::Validation(other.to_string()),
    }
}
