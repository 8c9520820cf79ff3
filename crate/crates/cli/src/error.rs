//! CLI error taxonomy mapped onto exit codes: 2 for usage/config problems,
//! 1 when an invariant or acceptance check fails.

use std::fmt;

#[derive(Clone, Debug)]
pub enum CliError {
    Usage { message: String },
    Config { message: String },
    Io { message: String },
    Failure { message: String },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage { .. } | CliError::Config { .. } | CliError::Io { .. } => 2,
            CliError::Failure { .. } => 1,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Usage { message }
            | CliError::Config { message }
            | CliError::Io { message }
            | CliError::Failure { message } => message,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.message())
    }
}

impl std::error::Error for CliError {}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io {
            message: e.to_string(),
        }
    }
}
