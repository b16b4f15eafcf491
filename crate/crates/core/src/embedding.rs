//! Word vectors in GloVe text format and exhaustive nearest-neighbour lookup.

use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::tokenize::tokenize;

#[derive(Debug, Clone)]
pub struct EmbeddingStore {
    dimension: usize,
    words: Vec<String>,
    vectors: Vec<Vec<f64>>,
    lookup: HashMap<String, usize>,
    skipped_lines: usize,
}

impl EmbeddingStore {
    /// Builds a store from in-memory pairs. Words are lowercased; later duplicates are dropped.
    pub fn from_pairs<I, S>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, Vec<f64>)>,
        S: AsRef<str>,
    {
        let mut store = EmbeddingStore {
            dimension: 0,
            words: Vec::new(),
            vectors: Vec::new(),
            lookup: HashMap::new(),
            skipped_lines: 0,
        };
        for (w, v) in pairs {
            if store.words.is_empty() {
                store.dimension = v.len();
            }
            if v.len() != store.dimension || v.is_empty() {
                return Err(Error::LengthMismatch {
                    left: store.dimension,
                    right: v.len(),
                });
            }
            store.insert(w.as_ref().to_lowercase(), v);
        }
        Ok(store)
    }

    fn insert(&mut self, word: String, v: Vec<f64>) -> bool {
        if self.lookup.contains_key(&word) {
            return false;
        }
        self.lookup.insert(word.clone(), self.words.len());
        self.words.push(word);
        self.vectors.push(v);
        true
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Lines rejected while loading (wrong arity, bad numbers, duplicate words).
    pub fn skipped_lines(&self) -> usize {
        self.skipped_lines
    }

    pub fn vector(&self, word: &str) -> Option<&[f64]> {
        self.lookup.get(word).map(|&i| self.vectors[i].as_slice())
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.words.iter().map(String::as_str)
    }

    /// Mean vector of the query's in-vocabulary tokens.
    pub fn query_vector(&self, query: &str) -> Result<Vec<f64>> {
        let mut acc = vec![0.0; self.dimension];
        let mut hits = 0usize;
        for tok in tokenize(query) {
            if let Some(v) = self.vector(&tok) {
                for (a, x) in acc.iter_mut().zip(v) {
                    *a += x;
                }
                hits += 1;
            }
        }
        if hits == 0 {
            return Err(Error::OutOfVocabulary(query.to_string()));
        }
        for a in &mut acc {
            *a /= hits as f64;
        }
        Ok(acc)
    }

    /// Top-`k` vocabulary words by cosine to the query's mean vector. Query tokens and
    /// `exclude` never appear; ties are ordered lexicographically.
    pub fn nearest_words(
        &self,
        query: &str,
        k: usize,
        exclude: &HashSet<String>,
    ) -> Result<Vec<(String, f64)>> {
        if k == 0 {
            return Ok(Vec::new());
        }
        let target = self.query_vector(query)?;
        let own: HashSet<String> = tokenize(query).into_iter().collect();
        let mut scored: Vec<(usize, f64)> = self
            .vectors
            .par_iter()
            .enumerate()
            .filter(|(i, _)| {
                let w = &self.words[*i];
                !own.contains(w) && !exclude.contains(w)
            })
            .map(|(i, v)| (i, cosine_unchecked(&target, v)))
            .collect();
        scored.sort_by(|a, b| {
            b.1.total_cmp(&a.1)
                .then_with(|| self.words[a.0].cmp(&self.words[b.0]))
        });
        Ok(scored
            .into_iter()
            .take(k)
            .map(|(i, s)| (self.words[i].clone(), s))
            .collect())
    }
}

/// Loads a whitespace-separated `word v1 .. vd` file. The first well-formed line fixes
/// the dimension; lines of any other arity are skipped and counted.
pub fn load_vectors(path: impl AsRef<Path>, expected_dim: Option<usize>) -> Result<EmbeddingStore> {
    let path = path.as_ref();
    let raw = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let err = |message: String| Error::Embeddings {
        path: path.to_path_buf(),
        message,
    };

    let mut store = EmbeddingStore {
        dimension: 0,
        words: Vec::new(),
        vectors: Vec::new(),
        lookup: HashMap::new(),
        skipped_lines: 0,
    };
    for (i, line) in raw.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        if i == 0 && is_word2vec_header(line) {
            store.skipped_lines += 1;
            continue;
        }
        let mut parts = line.split_whitespace();
        let Some(word) = parts.next() else { continue };
        let parsed: std::result::Result<Vec<f64>, _> = parts.map(str::parse::<f64>).collect();
        let Ok(v) = parsed else {
            store.skipped_lines += 1;
            continue;
        };
        if v.is_empty() || v.iter().any(|x| !x.is_finite()) {
            store.skipped_lines += 1;
            continue;
        }
        if store.words.is_empty() && store.dimension == 0 {
            if let Some(e) = expected_dim {
                if v.len() != e {
                    return Err(err(format!(
                        "vectors have dimension {}, expected {e}",
                        v.len()
                    )));
                }
            }
            store.dimension = v.len();
        }
        if v.len() != store.dimension {
            store.skipped_lines += 1;
            continue;
        }
        if !store.insert(word.to_lowercase(), v) {
            store.skipped_lines += 1;
        }
    }
    if store.words.is_empty() {
        return Err(err("no valid vector lines".into()));
    }
    Ok(store)
}

// "<vocab size> <dimension>" as written by word2vec tooling.
fn is_word2vec_header(line: &str) -> bool {
    let parts: Vec<&str> = line.split_whitespace().collect();
    parts.len() == 2 && parts.iter().all(|p| p.parse::<u64>().is_ok())
}

/// Cosine similarity; 0 when either vector is all zeros.
pub fn cosine(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::LengthMismatch {
            left: u.len(),
            right: v.len(),
        });
    }
    Ok(cosine_unchecked(u, v))
}

fn cosine_unchecked(u: &[f64], v: &[f64]) -> f64 {
    let (mut dot, mut nu, mut nv) = (0.0, 0.0, 0.0);
    for (a, b) in u.iter().zip(v) {
        dot += a * b;
        nu += a * a;
        nv += b * b;
    }
    if nu == 0.0 || nv == 0.0 {
        return 0.0;
    }
    (dot / (nu * nv).sqrt()).clamp(-1.0, 1.0)
}
