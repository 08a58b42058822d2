use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed case-file syntax.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// A parsed network violates one of its structural invariants.
    #[error("validation error: {0}")]
    Validation(String),

    /// An operation was asked to do something its inputs do not allow,
    /// e.g. removing a component that is already out of service.
    #[error("{0}")]
    Domain(String),

    #[error("base case infeasible: {0}")]
    BaseCaseInfeasible(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error("config error: {0}")]
    Config(String),

    /// Wraps another error with the case/substation/relay it came from.
    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    /// Innermost error, skipping any context wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Context { source, .. } => source.root(),
            other => other,
        }
    }

    pub fn is_base_case_infeasible(&self) -> bool {
        matches!(self.root(), Error::BaseCaseInfeasible(_))
    }
}
