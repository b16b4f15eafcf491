#![allow(dead_code)]

use std::path::PathBuf;

use bqr_core::scoring::DimScore;
use bqr_core::{
    load_corpus, load_queries, load_vectors, Corpus, Document, EmbeddingStore, Error, Index,
    QueryTopic, ResultSet, Schema, ScoredQuery,
};

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/synthetic")
}

pub struct Synthetic {
    pub corpus: Corpus,
    pub topics: Vec<QueryTopic>,
    pub store: EmbeddingStore,
    pub index: Index,
}

pub fn synthetic() -> Synthetic {
    let dir = data_dir();
    let schema = Schema::load(dir.join("schema.json")).unwrap();
    let corpus = load_corpus(dir.join("corpus.jsonl"), schema).unwrap();
    let topics = load_queries(dir.join("topics.jsonl")).unwrap();
    let store = load_vectors(dir.join("glove.txt"), None).unwrap();
    let index = Index::build(&corpus, Default::default()).unwrap();
    Synthetic {
        corpus,
        topics,
        store,
        index,
    }
}

pub fn doc(id: &str, text: &str, attrs: &[(&str, &str)]) -> Document {
    Document {
        doc_id: id.into(),
        title: String::new(),
        url: None,
        text: text.into(),
        attributes: attrs
            .iter()
            .map(|(k, v)| (k.to_string(), vec![v.to_string()]))
            .collect(),
        quality: None,
    }
}

/// A point with the given values under dimension names d0, d1, ...
pub fn point(name: &str, values: &[f64]) -> ScoredQuery {
    ScoredQuery {
        query: name.into(),
        result_set: ResultSet {
            query: name.into(),
            hits: vec![],
            n_requested: 0,
        },
        dim_scores: values
            .iter()
            .enumerate()
            .map(|(i, &v)| DimScore {
                name: format!("d{i}"),
                value: v,
            })
            .collect(),
    }
}

/// Brute-force dominance over plain maximized vectors.
pub fn oracle_dominates(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x >= y) && a.iter().zip(b).any(|(x, y)| x > y)
}

/// Recombines the prompt's topic with its listed words, ten numbered lines at most.
pub fn scripted_reply(prompt: &str) -> bqr_core::Result<String> {
    let field = |name: &str| {
        prompt
            .lines()
            .find_map(|l| l.strip_prefix(name))
            .map(str::trim)
            .unwrap_or("")
            .to_string()
    };
    let topic = field("Topic:");
    let words: Vec<String> = field("Keywords:")
        .split(',')
        .map(|w| w.trim().to_string())
        .filter(|w| !w.is_empty())
        .collect();
    if topic.is_empty() || words.is_empty() {
        return Err(Error::Provider(
            "scripted reply needs a topic and keywords".into(),
        ));
    }
    let mut lines: Vec<String> = words.clone();
    lines.extend(words.iter().map(|w| format!("{topic} {w}")));
    lines.extend(words.windows(2).map(|p| format!("{} {}", p[0], p[1])));
    Ok(lines
        .iter()
        .take(10)
        .enumerate()
        .map(|(i, q)| format!("{}. {q}", i + 1))
        .collect::<Vec<_>>()
        .join("\n"))
}
