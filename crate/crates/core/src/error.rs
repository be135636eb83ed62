use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("validation error in document `{doc_id}`: {rule}")]
    Validation { doc_id: String, rule: String },

    #[error("format error at line {line}: {message}")]
    Format { line: usize, message: String },

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("invalid state: {0}")]
    State(String),

    #[error("curation error: sentences without any annotator label: {0:?}")]
    Unlabeled(Vec<(String, usize)>),

    #[error("curation error: tied votes at {0:?}")]
    Tie(Vec<(String, usize)>),

    #[error("no sentence embedding for document `{doc_id}` sentence {index}")]
    Coverage { doc_id: String, index: usize },

    #[error("training diverged at epoch {epoch}: loss is {loss}")]
    Divergence { epoch: usize, loss: f64 },

    #[error("fold {fold}: {source}")]
    Fold {
        fold: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("model file: {0}")]
    Model(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True when the underlying cause is a training divergence, looking
    /// through fold annotations.
    pub fn is_divergence(&self) -> bool {
        match self {
            Error::Divergence { .. } => true,
            Error::Fold { source, .. } => source.is_divergence(),
            _ => false,
        }
    }
}

/// Creates the directory that will hold `path`, if any.
pub(crate) fn ensure_parent(path: &std::path::Path) -> Result<()> {
    match path.parent().filter(|d| !d.as_os_str().is_empty()) {
        Some(dir) => std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e)),
        None => Ok(()),
    }
}
