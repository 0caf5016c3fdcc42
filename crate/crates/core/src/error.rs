use thiserror::Error;

/// Malformed expression text. Offsets are 0-based character positions.
#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier {name:?} at offset {offset}")]
    UnknownIdentifier { name: String, offset: usize },
    #[error("function {name} at offset {offset} takes {expected} argument(s), got {found}")]
    Arity { name: String, expected: usize, found: usize, offset: usize },
}

impl ParseError {
    pub fn offset(&self) -> usize {
        match self {
            ParseError::Syntax { offset, .. }
            | ParseError::UnknownIdentifier { offset, .. }
            | ParseError::Arity { offset, .. } => *offset,
        }
    }
}

/// Evaluation left the domain of an elementary function.
#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("{message} in `{subexpression}`")]
pub struct DomainError {
    pub message: String,
    pub subexpression: String,
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum Error {
    #[error("{context}: {source}")]
    Parse {
        context: String,
        #[source]
        source: ParseError,
    },
    #[error("{at}: {source}")]
    Domain {
        at: String,
        #[source]
        source: DomainError,
    },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid layout: {0}")]
    Layout(String),
    #[error("invalid direction: {0}")]
    Direction(String),
    #[error("adapted frame is singular (|det| = {0:e})")]
    SingularFrame(f64),
}

impl From<DomainError> for Error {
    fn from(source: DomainError) -> Self {
        Error::Domain { at: "expression".into(), source }
    }
}

impl From<ParseError> for Error {
    fn from(source: ParseError) -> Self {
        Error::Parse { context: "expression".into(), source }
    }
}

pub(crate) trait DomainContext<T> {
    fn at(self, at: impl FnOnce() -> String) -> Result<T, Error>;
}

impl<T> DomainContext<T> for Result<T, DomainError> {
    fn at(self, at: impl FnOnce() -> String) -> Result<T, Error> {
        self.map_err(|source| Error::Domain { at: at(), source })
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
