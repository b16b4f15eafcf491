//! The recommendation loop.
//!
//! The original query's results are the baseline every candidate is scored against.
//! Each iteration generates candidates, scores them, and folds them into the running
//! front: a candidate enters if nothing in the front dominates it and it is neither
//! dominated by nor tied with the original, and it evicts every member it dominates.
//! Between iterations the embedding neighbour pool grows by one word. The loop stops at
//! `k` recommendations or `max_iter` iterations, and the output is re-derived as the
//! Pareto front of everything that was scored.

use std::collections::HashSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::candidates::{llm_batch, normalize_query, CandidateBatch, Method, DEFAULT_K};
use crate::corpus::{Corpus, UnlabeledPolicy};
use crate::embedding::EmbeddingStore;
use crate::error::{Error, Result};
use crate::index::{Index, IndexParams};
use crate::llm::{LlmProvider, ProviderSettings};
use crate::pareto::{
    canonicalize, dominates_canonical, front_indices, pareto_front, pseudo_pareto_front,
};
use crate::scoring::{
    default_dimensions, validate_dimensions, DimScore, DimensionSpec, ScoredQuery, Scorer,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EngineConfig {
    /// Desired number of recommendations.
    pub k: usize,
    /// Documents retrieved per query.
    pub n: usize,
    pub max_iter: usize,
    pub method: Method,
    /// Empty means one entropy dimension per schema attribute, then relevance.
    pub dims: Vec<DimensionSpec>,
    pub unlabeled_policy: UnlabeledPolicy,
    /// Only prompt the LLM for multi-word queries; single-word queries use embedding
    /// neighbours directly.
    pub llm_multiword_only: bool,
    /// Name of a signed-mean dimension; when set, opposite-sign candidates that are
    /// non-dominated among themselves are also kept.
    pub pseudo_pareto: Option<String>,
    pub index: IndexParams,
    pub provider: ProviderSettings,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            k: DEFAULT_K,
            n: 20,
            max_iter: 5,
            method: Method::LlmSimilar,
            dims: Vec::new(),
            unlabeled_policy: UnlabeledPolicy::ExcludeUnlabeled,
            llm_multiword_only: false,
            pseudo_pareto: None,
            index: IndexParams::default(),
            provider: ProviderSettings::default(),
        }
    }
}

impl EngineConfig {
    pub fn resolved_dims(&self, corpus: &Corpus) -> Vec<DimensionSpec> {
        if self.dims.is_empty() {
            default_dimensions(&corpus.schema().dimensions)
        } else {
            self.dims.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("k", self.k), ("n", self.n), ("max_iter", self.max_iter)] {
            if v == 0 {
                return Err(Error::InvalidParameter(format!("{name} must be >= 1")));
            }
        }
        if !self.dims.is_empty() {
            validate_dimensions(&self.dims)?;
        }
        self.index.validate()
    }
}

/// Borrowed, read-only resources a recommendation runs against.
#[derive(Clone, Copy)]
pub struct Resources<'a> {
    pub index: &'a Index,
    pub corpus: &'a Corpus,
    pub store: Option<&'a EmbeddingStore>,
    pub provider: Option<&'a dyn LlmProvider>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    Admitted,
    DominatedByOriginal,
    TiesOriginal,
    Dominated,
    Unscorable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub query: String,
    pub dim_scores: Vec<DimScore>,
    pub outcome: Outcome,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationTrace {
    pub iteration: usize,
    pub generated: usize,
    pub candidates: Vec<TraceEntry>,
    pub evicted: Vec<String>,
    pub front_size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recommendation {
    pub method: Method,
    pub dims: Vec<DimensionSpec>,
    pub original: ScoredQuery,
    pub recs: Vec<ScoredQuery>,
    /// Every candidate that was scored, in scoring order.
    pub scored: Vec<ScoredQuery>,
    pub iterations_used: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pseudo_pareto: Option<String>,
    pub trace: Vec<IterationTrace>,
}

impl Recommendation {
    pub fn rec_queries(&self) -> Vec<&str> {
        self.recs.iter().map(|r| r.query.as_str()).collect()
    }
}

struct FrontTracker<'a> {
    dims: &'a [DimensionSpec],
    baseline: Vec<f64>,
    pseudo: Option<(&'a str, f64)>,
    original: &'a ScoredQuery,
    eligible: Vec<ScoredQuery>,
    alive: Vec<(ScoredQuery, Vec<f64>)>,
}

impl<'a> FrontTracker<'a> {
    fn offer(&mut self, cand: ScoredQuery) -> Result<(Outcome, Vec<String>)> {
        let canon = canonicalize(std::slice::from_ref(&cand), self.dims)?.remove(0);
        if canon == self.baseline {
            return Ok((Outcome::TiesOriginal, vec![]));
        }
        if let Some((signed, bias)) = self.pseudo {
            return self.offer_pseudo(cand, signed, bias);
        }
        if dominates_canonical(&self.baseline, &canon) {
            return Ok((Outcome::DominatedByOriginal, vec![]));
        }
        self.eligible.push(cand.clone());
        if self
            .alive
            .iter()
            .any(|(_, a)| dominates_canonical(a, &canon))
        {
            return Ok((Outcome::Dominated, vec![]));
        }
        let mut evicted = Vec::new();
        self.alive.retain(|(q, a)| {
            let dominated = dominates_canonical(&canon, a);
            if dominated {
                evicted.push(q.query.clone());
            }
            !dominated
        });
        self.alive.push((cand, canon));
        Ok((Outcome::Admitted, evicted))
    }

    // With opposite-sign retention the front is not closed under insert-and-evict, so it
    // is recomputed over the original plus every eligible candidate.
    fn offer_pseudo(
        &mut self,
        cand: ScoredQuery,
        signed: &str,
        bias: f64,
    ) -> Result<(Outcome, Vec<String>)> {
        let query = cand.query.clone();
        self.eligible.push(cand);
        let mut pool = vec![self.original.clone()];
        pool.extend(self.eligible.iter().cloned());
        let front = pseudo_pareto_front(&pool, self.dims, signed, bias)?;
        let alive_now: HashSet<&str> = front
            .iter()
            .map(|q| q.query.as_str())
            .filter(|q| *q != self.original.query)
            .collect();
        let evicted: Vec<String> = self
            .alive
            .iter()
            .filter(|(q, _)| !alive_now.contains(q.query.as_str()))
            .map(|(q, _)| q.query.clone())
            .collect();
        let admitted = alive_now.contains(query.as_str());
        let canon = canonicalize(&self.eligible, self.dims)?;
        self.alive = self
            .eligible
            .iter()
            .zip(canon)
            .filter(|(q, _)| alive_now.contains(q.query.as_str()))
            .map(|(q, c)| (q.clone(), c))
            .collect();
        let outcome = if admitted {
            Outcome::Admitted
        } else {
            Outcome::Dominated
        };
        Ok((outcome, evicted))
    }

    fn finish(&self) -> Result<Vec<ScoredQuery>> {
        match self.pseudo {
            Some((signed, bias)) => {
                let mut pool = vec![self.original.clone()];
                pool.extend(self.eligible.iter().cloned());
                let front = pseudo_pareto_front(&pool, self.dims, signed, bias)?;
                Ok(front
                    .into_iter()
                    .filter(|q| q.query != self.original.query)
                    .collect())
            }
            None => pareto_front(&self.eligible, self.dims),
        }
    }
}

/// Produces the candidate queries for one iteration, or `None` once nothing new can be
/// generated.
struct CandidateSource<'a> {
    method: Method,
    query: &'a str,
    keywords: &'a [String],
    k: usize,
    use_llm: bool,
    pool: Vec<String>,
    provider: Option<&'a dyn LlmProvider>,
}

impl CandidateSource<'_> {
    fn generate(&self, iteration: usize) -> Result<Option<CandidateBatch>> {
        if iteration == 0 {
            return self.first().map(Some);
        }
        let upto = self.k + iteration;
        if self.pool.len() < upto {
            return Ok(None);
        }
        let next = &self.pool[upto - 1];
        let batch = match (self.method, self.use_llm) {
            (Method::Embedding, _) | (_, false) => {
                CandidateBatch::new(self.method, self.query, [next], 1)
            }
            (Method::LlmSimilar, true) => self.prompt(&self.pool[..upto])?,
            (Method::LlmKeywords, true) => {
                let mut words = self.keywords.to_vec();
                words.extend(self.pool[self.k..upto].iter().cloned());
                self.prompt(&words)?
            }
        };
        Ok(Some(batch))
    }

    fn first(&self) -> Result<CandidateBatch> {
        let top = &self.pool[..self.pool.len().min(self.k)];
        match (self.method, self.use_llm) {
            (Method::Embedding, _) | (_, false) => {
                Ok(CandidateBatch::new(self.method, self.query, top, self.k))
            }
            (Method::LlmSimilar, true) => {
                if top.is_empty() {
                    return Err(Error::InvalidParameter(
                        "no embedding neighbours to prompt with".into(),
                    ));
                }
                self.prompt(top)
            }
            (Method::LlmKeywords, true) => self.prompt(self.keywords),
        }
    }

    fn prompt(&self, words: &[String]) -> Result<CandidateBatch> {
        let provider = self
            .provider
            .ok_or_else(|| Error::Provider("no llm provider configured".into()))?;
        llm_batch(self.method, provider, self.query, words, self.k)
    }
}

/// Recommends balanced alternatives to `query`. `keywords` are only used by method 3.
pub fn recommend(
    query: &str,
    keywords: &[String],
    config: &EngineConfig,
    res: &Resources<'_>,
) -> Result<Recommendation> {
    config.validate()?;
    if query.trim().is_empty() {
        return Err(Error::InvalidParameter("query must not be empty".into()));
    }
    let dims = config.resolved_dims(res.corpus);
    validate_dimensions(&dims)?;

    let original_rs = res.index.search(query, config.n)?;
    if original_rs.is_empty() {
        return Err(Error::UnscorableBaseline(query.to_string()));
    }
    let scorer = Scorer::new(
        res.index,
        res.corpus,
        &dims,
        config.unlabeled_policy,
        config.n,
        original_rs.clone(),
    )?;
    let original = scorer.score_results(query, original_rs)?;

    let pseudo = match &config.pseudo_pareto {
        Some(name) => {
            let bias = original
                .score(name)
                .ok_or_else(|| Error::NotSignedDimension(name.clone()))?;
            Some((name.as_str(), bias))
        }
        None => None,
    };

    let multiword = crate::tokenize::tokenize(query).len() > 1;
    let use_llm = config.method.uses_llm() && (multiword || !config.llm_multiword_only);
    if config.method == Method::LlmKeywords && use_llm && keywords.is_empty() {
        return Err(Error::MethodInapplicable(query.to_string()));
    }

    let wants_pool = config.method != Method::LlmKeywords || !use_llm;
    let pool = match res.store {
        Some(store) => {
            match store.nearest_words(query, config.k + config.max_iter, &HashSet::new()) {
                Ok(words) => words.into_iter().map(|(w, _)| w).collect(),
                Err(Error::OutOfVocabulary(_)) if !wants_pool => Vec::new(),
                Err(e) => return Err(e),
            }
        }
        None if wants_pool => {
            return Err(Error::InvalidParameter(format!(
                "method {} needs an embedding store",
                config.method
            )))
        }
        None => Vec::new(),
    };
    let source = CandidateSource {
        method: config.method,
        query,
        keywords,
        k: config.k,
        use_llm,
        pool,
        provider: res.provider,
    };

    let baseline = canonicalize(std::slice::from_ref(&original), &dims)?.remove(0);
    let mut tracker = FrontTracker {
        dims: &dims,
        baseline,
        pseudo,
        original: &original,
        eligible: Vec::new(),
        alive: Vec::new(),
    };

    let mut seen: HashSet<String> = HashSet::from([normalize_query(query)]);
    let mut scored_all = Vec::new();
    let mut trace = Vec::new();
    let mut iterations = 0;
    while iterations < config.max_iter && tracker.alive.len() < config.k {
        let wrap = |e: Error| Error::Iteration {
            iteration: iterations,
            source: Box::new(e),
        };
        let Some(batch) = source.generate(iterations).map_err(wrap)? else {
            break;
        };
        let generated = batch.queries.len();
        let mut fresh: Vec<String> = batch
            .queries
            .into_iter()
            .filter(|q| seen.insert(q.clone()))
            .collect();
        fresh.sort();

        let results: Vec<(String, Result<ScoredQuery>)> = fresh
            .into_par_iter()
            .map(|q| {
                let r = scorer.score(&q);
                (q, r)
            })
            .collect();

        let mut entries = Vec::new();
        let mut evicted = Vec::new();
        for (q, r) in results {
            let sq = match r {
                Ok(sq) => sq,
                Err(e @ (Error::EmptyResultSet | Error::MissingBiasLabel(_))) => {
                    entries.push(TraceEntry {
                        query: q,
                        dim_scores: vec![],
                        outcome: Outcome::Unscorable,
                        detail: Some(e.to_string()),
                    });
                    continue;
                }
                Err(e) => return Err(wrap(e)),
            };
            scored_all.push(sq.clone());
            let dim_scores = sq.dim_scores.clone();
            let (outcome, ev) = tracker.offer(sq).map_err(wrap)?;
            evicted.extend(ev);
            entries.push(TraceEntry {
                query: q,
                dim_scores,
                outcome,
                detail: None,
            });
        }
        trace.push(IterationTrace {
            iteration: iterations,
            generated,
            candidates: entries,
            evicted,
            front_size: tracker.alive.len(),
        });
        iterations += 1;
    }

    let recs = tracker.finish()?;
    debug_assert_eq!(
        recs.iter().map(|q| &q.query).collect::<HashSet<_>>(),
        tracker
            .alive
            .iter()
            .map(|(q, _)| &q.query)
            .collect::<HashSet<_>>()
    );
    Ok(Recommendation {
        method: config.method,
        dims,
        original,
        recs,
        scored: scored_all,
        iterations_used: iterations,
        pseudo_pareto: config.pseudo_pareto.clone(),
        trace,
    })
}

/// Re-checks a recommendation against the front of the original plus every scored
/// candidate: recs must be exactly that front minus the original and its ties.
pub fn verify_front(rec: &Recommendation) -> Result<bool> {
    let baseline = canonicalize(std::slice::from_ref(&rec.original), &rec.dims)?.remove(0);
    let scored_canon = canonicalize(&rec.scored, &rec.dims)?;
    let mut pool = vec![rec.original.clone()];
    pool.extend(
        rec.scored
            .iter()
            .zip(&scored_canon)
            .filter(|(_, c)| **c != baseline)
            .map(|(q, _)| q.clone()),
    );
    let front: Vec<String> = match &rec.pseudo_pareto {
        Some(name) => {
            let bias = rec
                .original
                .score(name)
                .ok_or_else(|| Error::NotSignedDimension(name.clone()))?;
            pseudo_pareto_front(&pool, &rec.dims, name, bias)?
                .into_iter()
                .filter(|q| q.query != rec.original.query)
                .map(|q| q.query)
                .collect()
        }
        None => {
            let canon = canonicalize(&pool, &rec.dims)?;
            front_indices(&canon)
                .into_iter()
                .filter(|&i| i != 0)
                .map(|i| pool[i].query.clone())
                .collect()
        }
    };
    let recs: Vec<String> = rec.recs.iter().map(|q| q.query.clone()).collect();
    Ok(recs == front)
}
