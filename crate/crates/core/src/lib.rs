//! Balanced query recommendation.
//!
//! Given a query over an attribute-labeled corpus, retrieve its BM25 results, generate
//! alternative queries (embedding neighbours or LLM rewrites), score each alternative on
//! relevance to the original results and on how differently its results are spread over
//! each attribute dimension, and recommend the Pareto-optimal alternatives.
//!
//! ```no_run
//! use bqr_core::{load_corpus, load_vectors, recommend, EngineConfig, Index, Method, Resources, Schema};
//!
//! # fn main() -> bqr_core::Result<()> {
//! let corpus = load_corpus("corpus.jsonl", Schema::new(["geography", "gender"]))?;
//! let index = Index::build(&corpus, Default::default())?;
//! let store = load_vectors("glove.txt", None)?;
//! let config = EngineConfig { method: Method::Embedding, ..Default::default() };
//! let res = Resources { index: &index, corpus: &corpus, store: Some(&store), provider: None };
//! let rec = recommend("politics", &[], &config, &res)?;
//! for q in &rec.recs {
//!     println!("{} {:?}", q.query, q.values());
//! }
//! # Ok(())
//! # }
//! ```

pub mod candidates;
pub mod corpus;
pub mod embedding;
pub mod engine;
pub mod error;
pub mod eval;
pub mod index;
pub mod llm;
pub mod pareto;
pub mod scoring;
pub mod tokenize;

pub use candidates::{
    method1_embedding, method2_llm_with_similar, method3_llm_with_keywords, parse_query_list,
    render_prompt, CandidateBatch, Method,
};
pub use corpus::{
    attribute_distribution, load_corpus, load_queries, Corpus, Distribution, Document, QueryTopic,
    Schema, UnlabeledPolicy,
};
pub use embedding::{cosine, load_vectors, EmbeddingStore};
pub use engine::{recommend, verify_front, EngineConfig, Recommendation, Resources};
pub use error::{Error, Result};
pub use eval::{domination_score, method_matrix, DominationMatrix};
pub use index::{Hit, Index, IndexParams, ResultSet};
pub use llm::{LlmProvider, ReplayProvider};
pub use pareto::{dominates, pareto_front, pseudo_pareto_front, Orientation, OrientedVector};
pub use scoring::{
    doc_set_relevance, entropy_score, jsd, signed_bias, DimScore, DimensionKind, DimensionSpec,
    ScoredQuery,
};
