use std::fmt;

/// Failure of a CLI run, mapped onto the process exit status.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config documents or parameter values (exit 2).
    Config(String),
    /// The request is valid but no parameters satisfy it (exit 3).
    Infeasible(String),
    /// Anything else, including I/O failures (exit 4).
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Infeasible(_) => 3,
            CliError::Internal(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Infeasible(m) => write!(f, "infeasible: {m}"),
            CliError::Internal(m) => write!(f, "internal error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<clifford_distill::Error> for CliError {
    fn from(e: clifford_distill::Error) -> Self {
        use clifford_distill::Error as E;
        match e {
            E::Domain(m) => CliError::Config(m),
            E::CapExceeded { .. } => CliError::Config(e.to_string()),
            E::Infeasible(m) => CliError::Infeasible(m),
            E::DimensionMismatch { .. } => CliError::Internal(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Internal(e.to_string())
    }
}

pub fn config_error<T>(msg: impl Into<String>) -> Result<T, CliError> {
    Err(CliError::Config(msg.into()))
}
