use thiserror::Error;

use crate::bio::AduSpan;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("span {span:?} is out of range for a sequence of length {len}")]
    SpanOutOfRange { span: AduSpan, len: usize },

    #[error("span {span:?} overlaps span {other:?}")]
    SpanOverlap { span: AduSpan, other: AduSpan },

    #[error("invalid BIO transition at index {index}: {tag}")]
    InvalidBio { index: usize, tag: String },

    #[error("malformed tag {0:?}")]
    MalformedTag(String),

    #[error("length mismatch: {what} ({left} vs {right})")]
    LengthMismatch {
        what: &'static str,
        left: usize,
        right: usize,
    },

    #[error("invalid core elements {copa_id:?}: {reason}")]
    InvalidCore { copa_id: String, reason: String },

    #[error("invalid template configuration: {0}")]
    InvalidConfig(String),

    #[error("duplicate copa_id {0:?} in one split")]
    DuplicateCopa(String),

    #[error("ADU {index} is empty after splitting off DM {dm:?}")]
    EmptyAdu { index: usize, dm: String },

    #[error("ADU label {0:?} has no role class")]
    UnmappedLabel(String),

    #[error("annotation spans overlap: {0}")]
    OverlappingAnnotations(String),

    #[error("{0}")]
    InvalidInput(String),

    #[error("zero variance in {0}")]
    ZeroVariance(&'static str),

    #[error("{file}:{line}: {reason}")]
    Parse { file: String, line: usize, reason: String },

    #[error(transparent)]
    Remote(#[from] crate::augment::remote::RemoteError),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn parse(file: impl Into<String>, line: usize, reason: impl Into<String>) -> Self {
        Error::Parse {
            file: file.into(),
            line,
            reason: reason.into(),
        }
    }
}
