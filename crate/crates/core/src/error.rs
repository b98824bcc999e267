use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {count} of {total} records malformed (lines {lines:?})")]
    MalformedRecords {
        path: PathBuf,
        count: usize,
        total: usize,
        lines: Vec<usize>,
    },

    #[error("{path}: corrupt file: {reason}")]
    Corrupt { path: PathBuf, reason: String },

    #[error("{path}: unsupported format version {found} (expected {expected})")]
    VersionMismatch {
        path: PathBuf,
        found: u32,
        expected: u32,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("unknown lexicon `{0}`")]
    UnknownLexicon(String),

    #[error("day ranges do not match: {0}")]
    DayMismatch(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("vocabulary hash mismatch: model {model}, corpus {corpus}")]
    VocabularyMismatch { model: String, corpus: String },

    #[error("lexicons differ between reports: {0}")]
    LexiconMismatch(String),

    #[error("topic id {id} out of range for {topics} topics")]
    TopicOutOfRange { id: u32, topics: usize },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
