use std::io;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Unreadable or invalid configuration; `location` is `file` or `file:line`.
    #[error("{location}: {message}")]
    Config { location: String, message: String },
    #[error("{0}")]
    Runtime(#[from] shapemap_core::Error),
    #[error("{0}")]
    Usage(String),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } | CliError::Usage(_) => 2,
            CliError::Runtime(_) | CliError::Io(_) | CliError::Csv(_) => 1,
        }
    }
}

/// How a command finished when it ran to completion.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Ok,
    ValidationFailed,
    VerificationFailed,
    /// The computation stopped on a domain error after reporting what it had.
    DomainError,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::DomainError => 1,
            Status::ValidationFailed => 3,
            Status::VerificationFailed => 4,
        }
    }
}
