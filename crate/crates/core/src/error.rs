use std::io;
use std::path::PathBuf;

/// Errors produced anywhere in the pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("empty corpus")]
    EmptyCorpus,

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("index {index} out of range (limit {limit})")]
    OutOfRange { index: usize, limit: usize },

    #[error("no supporting documents for word {word}")]
    NoSupportingDocuments { word: usize },

    #[error("no non-supporting documents for word {word}")]
    NoNonSupportingDocuments { word: usize },

    #[error("word {word} has no knowledge entry")]
    MissingKnowledge { word: usize },

    #[error("no q-polarity knowledge for word {word} (q={q})")]
    NoPolarityKnowledge { word: usize, q: bool },

    #[error("knowledge/vocabulary mismatch")]
    VocabularyMismatch,

    #[error("corrupt knowledge file at byte offset {offset} (last good word: {last_good}): {reason}")]
    CorruptKnowledge {
        offset: u64,
        last_good: LastGood,
        reason: String,
    },

    #[error("unknown word `{0}`")]
    UnknownWord(String),

    #[error("duplicate target word {0}")]
    DuplicateTarget(usize),

    #[error("zero vector")]
    ZeroVector,

    #[error("undefined correlation")]
    UndefinedCorrelation,

    #[error("no evaluable pairs in benchmark `{0}`")]
    NoEvaluablePairs(String),

    #[error("training set contains a single class")]
    SingleClass,

    #[error("skip rate {skipped}/{attempted} exceeds 50% ({detail})")]
    ExcessiveSkips {
        skipped: u64,
        attempted: u64,
        detail: String,
    },

    #[error("parse error in {source_name} line {line}: {reason}")]
    Parse {
        source_name: String,
        line: usize,
        reason: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

/// Word index of the last fully decoded record, if any.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LastGood(pub Option<u32>);

impl std::fmt::Display for LastGood {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.0 {
            Some(w) => write!(f, "{w}"),
            None => f.write_str("none"),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn io_err(path: impl Into<PathBuf>) -> impl FnOnce(io::Error) -> Error {
    let path = path.into();
    move |source| Error::Io { path, source }
}

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
