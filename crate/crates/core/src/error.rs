//! Crate-wide error type used by the pipeline and the command line.

use std::path::PathBuf;

use thiserror::Error;

use crate::document::DocumentError;
use crate::embedding::EmbeddingError;
use crate::features::FeatureError;
use crate::metrics::MetricsError;
use crate::salience::SalienceError;
use crate::selection::SelectionError;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Document(#[from] DocumentError),
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
    #[error(transparent)]
    Features(#[from] FeatureError),
    #[error(transparent)]
    Salience(#[from] SalienceError),
    #[error(transparent)]
    Selection(#[from] SelectionError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    InFile { path: PathBuf, source: Box<Error> },
    #[error("invariant violated: {0}")]
    Invariant(String),
}

/// How an error should be reported to a caller.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Bad or unreadable input, or a bad configuration value.
    Input,
    /// A postcondition the pipeline guarantees did not hold.
    Invariant,
}

impl Error {
    pub fn in_file(self, path: impl Into<PathBuf>) -> Self {
        Error::InFile { path: path.into(), source: Box::new(self) }
    }

    pub fn class(&self) -> ErrorClass {
        match self {
            Error::InFile { source, .. } => source.class(),
            Error::Invariant(_) => ErrorClass::Invariant,
            Error::Selection(SelectionError::InvalidProblem(_) | SelectionError::TooLarge { .. }) => ErrorClass::Invariant,
            _ => ErrorClass::Input,
        }
    }

    /// Short stable identifier for machine-readable reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Document(_) => "document",
            Error::Embedding(_) => "embedding",
            Error::Features(_) => "features",
            Error::Salience(_) => "salience",
            Error::Selection(_) => "selection",
            Error::Metrics(_) => "metrics",
            Error::Config(_) => "config",
            Error::Io { .. } => "io",
            Error::InFile { source, .. } => source.kind(),
            Error::Invariant(_) => "invariant",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classification_sees_through_file_context() {
        let e = Error::from(DocumentError::EmptySlides).in_file("a.slides.txt");
        assert_eq!((e.class(), e.kind()), (ErrorClass::Input, "document"));
        assert_eq!(e.to_string(), "a.slides.txt: slides text contains no usable lines");
        let e = Error::Invariant("x".into()).in_file("p");
        assert_eq!(e.class(), ErrorClass::Invariant);
    }
}
