//! Inverted index with Lucene-style BM25 ranking.
//!
//! ```text
//! score(d, q) = Σ_t idf(t) · tf(t,d)·(k1+1) / (tf(t,d) + k1·(1 − b + b·|d|/avgdl))
//! idf(t)      = ln(1 + (N − df + 0.5) / (df + 0.5))
//! ```
//!
//! Title and body are indexed as one field. A query term repeated in the query is
//! counted once per occurrence, as a bag-of-words query would.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::tokenize::tokenize;

const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndexParams {
    pub k1: f64,
    pub b: f64,
}

impl Default for IndexParams {
    fn default() -> Self {
        IndexParams { k1: 0.9, b: 0.4 }
    }
}

impl IndexParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.k1 > 0.0 && self.k1.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "k1 must be > 0, got {}",
                self.k1
            )));
        }
        if !(0.0..=1.0).contains(&self.b) {
            return Err(Error::InvalidParameter(format!(
                "b must be in [0,1], got {}",
                self.b
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hit {
    pub doc_id: String,
    pub score: f64,
}

/// Top-n documents for one query, best first; ties broken by ascending doc id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultSet {
    pub query: String,
    pub hits: Vec<Hit>,
    pub n_requested: usize,
}

impl ResultSet {
    pub fn doc_ids(&self) -> impl Iterator<Item = &str> {
        self.hits.iter().map(|h| h.doc_id.as_str())
    }

    pub fn is_empty(&self) -> bool {
        self.hits.is_empty()
    }

    pub fn len(&self) -> usize {
        self.hits.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexStats {
    pub doc_count: usize,
    pub vocab_size: usize,
    pub avg_doc_len: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Posting {
    doc: u32,
    tf: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Index {
    version: u32,
    params: IndexParams,
    doc_ids: Vec<String>,
    doc_lens: Vec<u32>,
    avg_doc_len: f64,
    postings: BTreeMap<String, Vec<Posting>>,
}

impl Index {
    pub fn build(corpus: &Corpus, params: IndexParams) -> Result<Self> {
        params.validate()?;
        if corpus.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let docs = corpus.documents();
        // Per-document term counts in parallel; merge below walks documents in order.
        let per_doc: Vec<(u32, BTreeMap<String, u32>)> = docs
            .par_iter()
            .map(|d| {
                let mut tokens = tokenize(&d.title);
                tokens.extend(tokenize(&d.text));
                let len = tokens.len() as u32;
                let mut tf = BTreeMap::new();
                for t in tokens {
                    *tf.entry(t).or_insert(0u32) += 1;
                }
                (len, tf)
            })
            .collect();

        let mut postings: BTreeMap<String, Vec<Posting>> = BTreeMap::new();
        let mut doc_lens = Vec::with_capacity(docs.len());
        for (i, (len, tf)) in per_doc.into_iter().enumerate() {
            doc_lens.push(len);
            for (term, count) in tf {
                postings.entry(term).or_default().push(Posting {
                    doc: i as u32,
                    tf: count,
                });
            }
        }
        let total: u64 = doc_lens.iter().map(|&l| l as u64).sum();
        Ok(Index {
            version: FORMAT_VERSION,
            params,
            doc_ids: docs.iter().map(|d| d.doc_id.clone()).collect(),
            doc_lens,
            avg_doc_len: total as f64 / docs.len() as f64,
            postings,
        })
    }

    pub fn stats(&self) -> IndexStats {
        IndexStats {
            doc_count: self.doc_ids.len(),
            vocab_size: self.postings.len(),
            avg_doc_len: self.avg_doc_len,
        }
    }

    pub fn params(&self) -> IndexParams {
        self.params
    }

    pub fn doc_freq(&self, term: &str) -> usize {
        self.postings.get(term).map_or(0, Vec::len)
    }

    fn idf(&self, df: usize) -> f64 {
        let n = self.doc_ids.len() as f64;
        let df = df as f64;
        (1.0 + (n - df + 0.5) / (df + 0.5)).ln()
    }

    pub fn search(&self, query: &str, n: usize) -> Result<ResultSet> {
        if n == 0 {
            return Err(Error::InvalidParameter("n must be >= 1".into()));
        }
        let IndexParams { k1, b } = self.params;
        let mut scores: HashMap<u32, f64> = HashMap::new();
        for term in tokenize(query) {
            let Some(list) = self.postings.get(&term) else {
                continue;
            };
            let idf = self.idf(list.len());
            for p in list {
                let dl = self.doc_lens[p.doc as usize] as f64;
                let rel_len = if self.avg_doc_len > 0.0 {
                    dl / self.avg_doc_len
                } else {
                    0.0
                };
                let tf = p.tf as f64;
                let s = idf * tf * (k1 + 1.0) / (tf + k1 * (1.0 - b + b * rel_len));
                *scores.entry(p.doc).or_insert(0.0) += s;
            }
        }
        let mut hits: Vec<Hit> = scores
            .into_iter()
            .map(|(doc, score)| Hit {
                doc_id: self.doc_ids[doc as usize].clone(),
                score,
            })
            .collect();
        hits.sort_by(|a, b| {
            b.score
                .total_cmp(&a.score)
                .then_with(|| a.doc_id.cmp(&b.doc_id))
        });
        hits.truncate(n);
        Ok(ResultSet {
            query: query.to_string(),
            hits,
            n_requested: n,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let bytes = serde_json::to_vec(self)?;
        fs::write(path, bytes).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        let index: Index = serde_json::from_slice(&bytes)?;
        if index.version != FORMAT_VERSION {
            return Err(Error::InvalidParameter(format!(
                "unsupported index format version {}",
                index.version
            )));
        }
        Ok(index)
    }
}
