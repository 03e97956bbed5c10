use thiserror::Error;

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),

    #[error(transparent)]
    Model(#[from] jba_core::Error),

    #[error("self-check failed: {0}")]
    Check(String),

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// 0 success, 1 input error, 2 validity-fatal, 3 self-check failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) | CliError::Io(_) => 1,
            CliError::Model(e) if e.is_validity_fatal() => 2,
            CliError::Model(_) => 1,
            CliError::Check(_) => 3,
        }
    }
}

pub(crate) fn input(msg: impl Into<String>) -> CliError {
    CliError::Input(msg.into())
}
