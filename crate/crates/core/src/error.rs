use std::path::PathBuf;

use thiserror::Error;

/// Errors raised across the laboratory.
#[derive(Debug, Error)]
pub enum LabError {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A required moment or integral does not exist.
    #[error("divergent: {what}")]
    Divergent { what: String },

    /// Preconditions of a limit theorem or study are not met.
    #[error("refused: {0}")]
    Refused(String),

    /// Malformed model specification, sample file or configuration.
    #[error("parse error: {0}")]
    Parse(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl LabError {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        LabError::Domain(msg.into())
    }

    pub(crate) fn divergent(what: impl Into<String>) -> Self {
        LabError::Divergent { what: what.into() }
    }

    pub(crate) fn refused(msg: impl Into<String>) -> Self {
        LabError::Refused(msg.into())
    }

    pub(crate) fn parse(msg: impl Into<String>) -> Self {
        LabError::Parse(msg.into())
    }

    /// True for the numeric refusals (divergent moments, unmet preconditions,
    /// domain violations) as opposed to input or I/O failures.
    pub fn is_numeric_refusal(&self) -> bool {
        matches!(self, LabError::Domain(_) | LabError::Divergent { .. } | LabError::Refused(_))
    }
}

pub type Result<T, E = LabError> = std::result::Result<T, E>;
