//! Immutable bundle of everything a request runs against.

use std::fs;
use std::path::{Path, PathBuf};

use bqr_core::llm::ProviderKind;
use bqr_core::{
    corpus::infer_schema, load_corpus, load_queries, load_vectors, Corpus, EmbeddingStore,
    EngineConfig, Error, Index, LlmProvider, QueryTopic, ReplayProvider, Resources, Schema,
};

#[derive(Debug, Clone, Default)]
pub struct DataPaths {
    pub corpus: Option<PathBuf>,
    pub topics: Option<PathBuf>,
    pub embeddings: Option<PathBuf>,
    pub fixtures: Option<PathBuf>,
    pub schema: Option<PathBuf>,
    /// Prebuilt index; built from the corpus when absent.
    pub index: Option<PathBuf>,
}

pub struct Snapshot {
    pub corpus: Corpus,
    pub index: Index,
    pub store: Option<EmbeddingStore>,
    pub topics: Vec<QueryTopic>,
    pub provider: Option<Box<dyn LlmProvider>>,
    pub config: EngineConfig,
}

impl Snapshot {
    pub fn load(paths: &DataPaths, config: EngineConfig) -> bqr_core::Result<Self> {
        let corpus_path = paths
            .corpus
            .as_deref()
            .ok_or_else(|| Error::InvalidParameter("--corpus is required".into()))?;
        let corpus = load_corpus_with_schema(corpus_path, paths.schema.as_deref())?;
        let index = match &paths.index {
            Some(p) => Index::load(p)?,
            None => Index::build(&corpus, config.index)?,
        };
        let store = paths
            .embeddings
            .as_deref()
            .map(|p| load_vectors(p, None))
            .transpose()?;
        let topics = match &paths.topics {
            Some(p) => {
                let t = load_queries(p)?;
                corpus.validate_topics(&t)?;
                t
            }
            None => Vec::new(),
        };
        let provider = build_provider(paths, &config)?;
        Ok(Snapshot {
            corpus,
            index,
            store,
            topics,
            provider,
            config,
        })
    }

    pub fn resources(&self) -> Resources<'_> {
        Resources {
            index: &self.index,
            corpus: &self.corpus,
            store: self.store.as_ref(),
            provider: self.provider.as_deref(),
        }
    }

    /// Keywords of the topic whose title matches `query`, ignoring case.
    pub fn topic_keywords(&self, query: &str) -> Vec<String> {
        let q = query.trim().to_lowercase();
        self.topics
            .iter()
            .find(|t| t.title.trim().to_lowercase() == q)
            .map(|t| t.keywords.clone())
            .unwrap_or_default()
    }
}

pub fn load_corpus_with_schema(corpus: &Path, schema: Option<&Path>) -> bqr_core::Result<Corpus> {
    match schema {
        Some(s) => load_corpus(corpus, Schema::load(s)?),
        None => {
            let probe = load_corpus(corpus, Schema::new(Vec::<String>::new()))?;
            let schema = infer_schema(probe.documents());
            Corpus::new(probe.documents().to_vec(), schema)
        }
    }
}

fn build_provider(
    paths: &DataPaths,
    config: &EngineConfig,
) -> bqr_core::Result<Option<Box<dyn LlmProvider>>> {
    let fixtures = paths
        .fixtures
        .clone()
        .or_else(|| config.provider.fixtures.clone());
    match (config.provider.kind, fixtures) {
        (ProviderKind::ReplayFixture, Some(p)) => Ok(Some(Box::new(ReplayProvider::load(p)?))),
        (ProviderKind::ReplayFixture, None) => Ok(None),
        (ProviderKind::LiveHttp, _) => live_provider(config),
    }
}

#[cfg(feature = "live")]
fn live_provider(config: &EngineConfig) -> bqr_core::Result<Option<Box<dyn LlmProvider>>> {
    let p = bqr_core::llm::LiveHttpProvider::from_settings(&config.provider)?;
    Ok(Some(Box::new(p)))
}

#[cfg(not(feature = "live"))]
fn live_provider(_: &EngineConfig) -> bqr_core::Result<Option<Box<dyn LlmProvider>>> {
    Err(Error::InvalidParameter(
        "live-http provider requested but this build lacks the `live` feature".into(),
    ))
}

/// Reads an engine config from TOML. Missing keys take their defaults.
pub fn load_config(path: Option<&Path>) -> Result<EngineConfig, String> {
    let Some(path) = path else {
        return Ok(EngineConfig::default());
    };
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let config: EngineConfig =
        toml::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    config
        .validate()
        .map_err(|e| format!("{}: {e}", path.display()))?;
    Ok(config)
}

/// True for failures caused by the caller's input rather than by this program.
pub fn is_user_error(e: &Error) -> bool {
    match e {
        Error::Iteration { source, .. } => is_user_error(source),
        Error::Io { .. }
        | Error::MalformedLine { .. }
        | Error::DuplicateDocId(_)
        | Error::EmptyDocId { .. }
        | Error::MissingTitle(_)
        | Error::UnknownRelevantDoc { .. }
        | Error::UnknownDimension(_)
        | Error::EmptyCorpus
        | Error::InvalidParameter(_)
        | Error::Embeddings { .. }
        | Error::OutOfVocabulary(_)
        | Error::LayoutMismatch(_)
        | Error::NotSignedDimension(_)
        | Error::MethodInapplicable(_)
        | Error::UnscorableBaseline(_)
        | Error::Provider(_) => true,
        _ => false,
    }
}
