//! Shared inputs for the benchmarks: the bundled synthetic dataset and random point sets.

use std::path::PathBuf;

use bqr_core::scoring::DimScore;
use bqr_core::{
    load_corpus, load_queries, load_vectors, Corpus, EmbeddingStore, Index, QueryTopic,
    ReplayProvider, ResultSet, Schema, ScoredQuery,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct Dataset {
    pub corpus: Corpus,
    pub index: Index,
    pub store: EmbeddingStore,
    pub topics: Vec<QueryTopic>,
    pub fixtures: ReplayProvider,
}

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/synthetic")
}

pub fn synthetic() -> Dataset {
    let dir = data_dir();
    let schema = Schema::load(dir.join("schema.json")).expect("schema");
    let corpus = load_corpus(dir.join("corpus.jsonl"), schema).expect("corpus");
    let index = Index::build(&corpus, Default::default()).expect("index");
    Dataset {
        index,
        store: load_vectors(dir.join("glove.txt"), None).expect("vectors"),
        topics: load_queries(dir.join("topics.jsonl")).expect("topics"),
        fixtures: ReplayProvider::load(dir.join("fixtures.json")).expect("fixtures"),
        corpus,
    }
}

/// `n` points with `dims` uniform coordinates named d0, d1, ...
pub fn random_points(n: usize, dims: usize, seed: u64) -> Vec<ScoredQuery> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| ScoredQuery {
            query: format!("p{i}"),
            result_set: ResultSet {
                query: format!("p{i}"),
                hits: vec![],
                n_requested: 0,
            },
            dim_scores: (0..dims)
                .map(|d| DimScore {
                    name: format!("d{d}"),
                    value: rng.random(),
                })
                .collect(),
        })
        .collect()
}
