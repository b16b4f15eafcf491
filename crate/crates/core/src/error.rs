use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: malformed record: {message}")]
    MalformedLine {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("duplicate document id `{0}`")]
    DuplicateDocId(String),

    #[error("document on line {line} has an empty doc_id")]
    EmptyDocId { line: usize },

    #[error("topic `{0}` has no title")]
    MissingTitle(String),

    #[error("topic `{topic}` references unknown document `{doc_id}`")]
    UnknownRelevantDoc { topic: String, doc_id: String },

    #[error("unknown attribute dimension `{0}`")]
    UnknownDimension(String),

    #[error("cannot index an empty corpus")]
    EmptyCorpus,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("embedding file {path}: {message}")]
    Embeddings { path: PathBuf, message: String },

    #[error("vector length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("no token of query `{0}` is in the embedding vocabulary")]
    OutOfVocabulary(String),

    #[error("jensen-shannon divergence of an empty distribution")]
    EmptyDistribution,

    #[error("document `{0}` has no signed bias label")]
    MissingBiasLabel(String),

    #[error("signed bias of an empty result set")]
    EmptyResultSet,

    #[error("dimension layout mismatch: {0}")]
    LayoutMismatch(String),

    #[error("dimension `{0}` is not a signed-mean dimension")]
    NotSignedDimension(String),

    #[error("llm provider failed: {0}")]
    Provider(String),

    #[error("could not parse a query list from llm response")]
    UnparseableResponse { raw: String },

    #[error("method 3 is inapplicable: topic `{0}` has no keywords")]
    MethodInapplicable(String),

    #[error("original query `{0}` returned no documents; nothing to compare against")]
    UnscorableBaseline(String),

    #[error("iteration {iteration}: {source}")]
    Iteration {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("serialization: {0}")]
    Serde(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
