use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("solver error: {0}")]
    Solver(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Config(_) => 2,
            Self::Solver(_) => 3,
            Self::Io(_) => 4,
        }
    }

    pub fn solver(e: impl std::fmt::Display) -> Self {
        Self::Solver(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Io(e.to_string())
    }
}

impl From<ellipsys::fd::FdError> for CliError {
    fn from(e: ellipsys::fd::FdError) -> Self {
        use ellipsys::fd::FdError;
        match e {
            FdError::Io(e) => Self::Io(e.to_string()),
            FdError::Format(_)
            | FdError::DimensionMismatch { .. }
            | FdError::InvalidGrid(_)
            | FdError::NonPositiveCoefficient { .. }
            | FdError::NegativeReaction { .. } => Self::Config(e.to_string()),
            other => Self::Solver(other.to_string()),
        }
    }
}
