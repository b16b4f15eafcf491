//! JSON payloads shared by the HTTP service and the CLI.

use std::collections::BTreeMap;

use bqr_core::corpus::Distribution;
use bqr_core::engine::Outcome;
use bqr_core::{
    recommend, DimScore, DimensionSpec, EngineConfig, Method, QueryTopic, Recommendation,
    ResultSet, ScoredQuery,
};
use serde::{Deserialize, Serialize};

use crate::snapshot::Snapshot;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HitView {
    pub doc_id: String,
    pub title: String,
    pub url: Option<String>,
    pub score: f64,
    pub attributes: BTreeMap<String, Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResponse {
    pub query: String,
    pub hits: Vec<HitView>,
    pub distributions: BTreeMap<String, Distribution>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredView {
    pub query: String,
    pub dim_scores: Vec<DimScore>,
    pub hits: Vec<HitView>,
    pub distributions: BTreeMap<String, Distribution>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationSummary {
    pub iteration: usize,
    pub generated: usize,
    pub admitted: usize,
    pub front_size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceSummary {
    pub iterations_used: usize,
    pub candidates_scored: usize,
    pub iterations: Vec<IterationSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecommendResponse {
    pub method: Method,
    pub dims: Vec<DimensionSpec>,
    pub original: ScoredView,
    pub recommendations: Vec<ScoredView>,
    pub trace_summary: TraceSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicList {
    pub topics: Vec<QueryTopic>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Health {
    pub status: String,
    pub docs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
    pub detail: String,
}

/// Body of `POST /api/recommend`. Unset fields fall back to the service config. When
/// `keywords` is absent, the keywords of a topic with the same title are used.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecommendRequest {
    pub query: String,
    pub k: Option<usize>,
    pub n: Option<usize>,
    pub method: Option<Method>,
    pub dims: Option<Vec<DimensionSpec>>,
    pub keywords: Option<Vec<String>>,
}

impl RecommendRequest {
    pub fn config(&self, base: &EngineConfig) -> EngineConfig {
        let mut c = base.clone();
        if let Some(k) = self.k {
            c.k = k;
        }
        if let Some(n) = self.n {
            c.n = n;
        }
        if let Some(m) = self.method {
            c.method = m;
        }
        if let Some(d) = &self.dims {
            c.dims = d.clone();
        }
        c
    }
}

pub fn search(snap: &Snapshot, query: &str, n: usize) -> bqr_core::Result<SearchResponse> {
    let rs = snap.index.search(query, n)?;
    Ok(SearchResponse {
        query: query.to_string(),
        hits: hits(snap, &rs),
        distributions: distributions(snap, &rs)?,
    })
}

/// Runs the engine for a request; returns the raw recommendation alongside its view.
pub fn recommend_request(
    snap: &Snapshot,
    req: &RecommendRequest,
) -> bqr_core::Result<(Recommendation, RecommendResponse)> {
    let config = req.config(&snap.config);
    let keywords = req
        .keywords
        .clone()
        .unwrap_or_else(|| snap.topic_keywords(&req.query));
    let rec = recommend(&req.query, &keywords, &config, &snap.resources())?;
    let view = recommend_response(snap, &rec)?;
    Ok((rec, view))
}

pub fn recommend_response(
    snap: &Snapshot,
    rec: &Recommendation,
) -> bqr_core::Result<RecommendResponse> {
    let recommendations = rec
        .recs
        .iter()
        .map(|q| scored_view(snap, q))
        .collect::<bqr_core::Result<_>>()?;
    let iterations = rec
        .trace
        .iter()
        .map(|it| IterationSummary {
            iteration: it.iteration,
            generated: it.generated,
            admitted: it
                .candidates
                .iter()
                .filter(|c| c.outcome == Outcome::Admitted)
                .count(),
            front_size: it.front_size,
        })
        .collect();
    Ok(RecommendResponse {
        method: rec.method,
        dims: rec.dims.clone(),
        original: scored_view(snap, &rec.original)?,
        recommendations,
        trace_summary: TraceSummary {
            iterations_used: rec.iterations_used,
            candidates_scored: rec.scored.len(),
            iterations,
        },
    })
}

fn scored_view(snap: &Snapshot, q: &ScoredQuery) -> bqr_core::Result<ScoredView> {
    Ok(ScoredView {
        query: q.query.clone(),
        dim_scores: q.dim_scores.clone(),
        hits: hits(snap, &q.result_set),
        distributions: distributions(snap, &q.result_set)?,
    })
}

fn hits(snap: &Snapshot, rs: &ResultSet) -> Vec<HitView> {
    rs.hits
        .iter()
        .filter_map(|h| {
            let d = snap.corpus.get(&h.doc_id)?;
            Some(HitView {
                doc_id: h.doc_id.clone(),
                title: d.title.clone(),
                url: d.url.clone(),
                score: h.score,
                attributes: d.attributes.clone(),
            })
        })
        .collect()
}

fn distributions(
    snap: &Snapshot,
    rs: &ResultSet,
) -> bqr_core::Result<BTreeMap<String, Distribution>> {
    let docs = snap.corpus.resolve(rs.doc_ids());
    snap.corpus
        .schema()
        .dimensions
        .iter()
        .map(|dim| {
            let d = snap
                .corpus
                .distribution(&docs, dim, snap.config.unlabeled_policy)?;
            Ok((dim.clone(), d))
        })
        .collect()
}
