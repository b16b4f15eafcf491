//! Comparing candidate-generation methods by how often one method's recommendations
//! dominate another's.
//!
//! For a topic and an ordered method pair `(A, B)` the cell holds
//! `Σ_{b ∈ recs_B} |{a ∈ recs_A : b dominates a}|`, i.e. how many of A's
//! recommendations B dominates, counted once per dominating query of B.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::candidates::{Method, PROMPT_VERSION};
use crate::corpus::QueryTopic;
use crate::engine::{recommend, EngineConfig, Recommendation, Resources};
use crate::error::{Error, Result};
use crate::pareto::{canonicalize, dominates_canonical};
use crate::scoring::{DimensionSpec, ScoredQuery};

/// How many queries in `recs_a` are dominated, summed over each query of `recs_b`.
pub fn domination_score(
    recs_a: &[ScoredQuery],
    recs_b: &[ScoredQuery],
    specs: &[DimensionSpec],
) -> Result<usize> {
    let a = canonicalize(recs_a, specs)?;
    let b = canonicalize(recs_b, specs)?;
    Ok(b.iter()
        .map(|qb| a.iter().filter(|qa| dominates_canonical(qb, qa)).count())
        .sum())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "status", content = "value")]
pub enum CellValue {
    Count(usize),
    Inapplicable,
    Failed,
}

impl CellValue {
    fn as_csv(&self) -> String {
        match self {
            CellValue::Count(n) => n.to_string(),
            CellValue::Inapplicable => "inapplicable".into(),
            CellValue::Failed => "failed".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cell {
    pub topic_id: String,
    pub method_a: Method,
    pub method_b: Method,
    pub score: CellValue,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairTotal {
    pub method_a: Method,
    pub method_b: Method,
    pub total: usize,
    pub self_comparison: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Failure {
    pub topic_id: String,
    pub method: Method,
    pub error: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Bucket {
    High,
    Mid,
    Low,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominationMatrix {
    pub methods: Vec<Method>,
    pub topics: Vec<String>,
    pub cells: Vec<Cell>,
    pub totals: Vec<PairTotal>,
    pub failures: Vec<Failure>,
}

impl DominationMatrix {
    pub fn cell(&self, topic_id: &str, a: Method, b: Method) -> Option<&CellValue> {
        self.cells
            .iter()
            .find(|c| c.topic_id == topic_id && c.method_a == a && c.method_b == b)
            .map(|c| &c.score)
    }

    pub fn total(&self, a: Method, b: Method) -> Option<usize> {
        self.totals
            .iter()
            .find(|t| t.method_a == a && t.method_b == b)
            .map(|t| t.total)
    }

    /// One row per (topic, ordered pair), then a `TOTAL` row per pair.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["topic_id", "method_a", "method_b", "score"])
            .map_err(csv_err)?;
        for c in &self.cells {
            w.write_record([
                c.topic_id.as_str(),
                c.method_a.id(),
                c.method_b.id(),
                &c.score.as_csv(),
            ])
            .map_err(csv_err)?;
        }
        for t in &self.totals {
            w.write_record([
                "TOTAL",
                t.method_a.id(),
                t.method_b.id(),
                &t.total.to_string(),
            ])
            .map_err(csv_err)?;
        }
        finish_csv(w)
    }

    /// Buckets each cross-method total relative to the others: the top third of the
    /// range is `high`, the bottom third `low`. Self-comparisons are always `mid` and
    /// flagged.
    pub fn buckets(&self) -> Vec<(PairTotal, Bucket)> {
        let cross: Vec<usize> = self
            .totals
            .iter()
            .filter(|t| !t.self_comparison)
            .map(|t| t.total)
            .collect();
        let lo = cross.iter().copied().min().unwrap_or(0) as f64;
        let hi = cross.iter().copied().max().unwrap_or(0) as f64;
        self.totals
            .iter()
            .map(|t| {
                let bucket = if t.self_comparison || hi == lo {
                    Bucket::Mid
                } else {
                    let x = (t.total as f64 - lo) / (hi - lo);
                    if x >= 2.0 / 3.0 {
                        Bucket::High
                    } else if x <= 1.0 / 3.0 {
                        Bucket::Low
                    } else {
                        Bucket::Mid
                    }
                };
                (t.clone(), bucket)
            })
            .collect()
    }

    pub fn summary_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["method_a", "method_b", "total", "bucket", "self_comparison"])
            .map_err(csv_err)?;
        for (t, b) in self.buckets() {
            let bucket = match b {
                Bucket::High => "high",
                Bucket::Mid => "mid",
                Bucket::Low => "low",
            };
            w.write_record([
                t.method_a.id(),
                t.method_b.id(),
                &t.total.to_string(),
                bucket,
                if t.self_comparison { "true" } else { "false" },
            ])
            .map_err(csv_err)?;
        }
        finish_csv(w)
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::InvalidParameter(format!("csv: {e}"))
}

fn finish_csv(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w
        .into_inner()
        .map_err(|e| Error::InvalidParameter(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

enum RunResult {
    Ok(Box<Recommendation>),
    Inapplicable,
    Failed,
}

/// Runs every method on every topic and fills all ordered method pairs. Per-topic
/// failures are recorded and the run continues.
pub fn method_matrix(
    topics: &[QueryTopic],
    methods: &[Method],
    config: &EngineConfig,
    res: &Resources<'_>,
) -> Result<DominationMatrix> {
    let dims = config.resolved_dims(res.corpus);
    let per_topic: Vec<(Vec<RunResult>, Vec<Failure>)> = topics
        .par_iter()
        .map(|topic| {
            let mut runs = Vec::with_capacity(methods.len());
            let mut failures = Vec::new();
            for &m in methods {
                let cfg = EngineConfig {
                    method: m,
                    ..config.clone()
                };
                match recommend(&topic.title, &topic.keywords, &cfg, res) {
                    Ok(r) => runs.push(RunResult::Ok(Box::new(r))),
                    Err(e) => {
                        let inapplicable = matches!(e, Error::MethodInapplicable(_));
                        failures.push(Failure {
                            topic_id: topic.topic_id.clone(),
                            method: m,
                            error: e.to_string(),
                        });
                        runs.push(if inapplicable {
                            RunResult::Inapplicable
                        } else {
                            RunResult::Failed
                        });
                    }
                }
            }
            (runs, failures)
        })
        .collect();

    let mut cells = Vec::new();
    let mut totals: BTreeMap<(Method, Method), usize> = BTreeMap::new();
    let mut failures = Vec::new();
    for (topic, (runs, fails)) in topics.iter().zip(per_topic) {
        failures.extend(fails);
        for (ia, &a) in methods.iter().enumerate() {
            for (ib, &b) in methods.iter().enumerate() {
                let score = match (&runs[ia], &runs[ib]) {
                    (RunResult::Ok(ra), RunResult::Ok(rb)) => {
                        let n = domination_score(&ra.recs, &rb.recs, &dims)?;
                        *totals.entry((a, b)).or_default() += n;
                        CellValue::Count(n)
                    }
                    (RunResult::Inapplicable, _) | (_, RunResult::Inapplicable) => {
                        CellValue::Inapplicable
                    }
                    _ => CellValue::Failed,
                };
                cells.push(Cell {
                    topic_id: topic.topic_id.clone(),
                    method_a: a,
                    method_b: b,
                    score,
                });
            }
        }
    }
    let totals = methods
        .iter()
        .flat_map(|&a| methods.iter().map(move |&b| (a, b)))
        .map(|(a, b)| PairTotal {
            method_a: a,
            method_b: b,
            total: totals.get(&(a, b)).copied().unwrap_or(0),
            self_comparison: a == b,
        })
        .collect();
    Ok(DominationMatrix {
        methods: methods.to_vec(),
        topics: topics.iter().map(|t| t.topic_id.clone()).collect(),
        cells,
        totals,
        failures,
    })
}

/// Long-format rows for plotting relevance against each diversity dimension: one row
/// per (query, dimension). The original query comes first and is never on the front.
pub fn scatter_csv(rec: &Recommendation) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["query", "dim", "value", "on_front"])
        .map_err(csv_err)?;
    let on_front = |q: &str| rec.recs.iter().any(|r| r.query == q);
    for q in std::iter::once(&rec.original).chain(&rec.scored) {
        let front = q.query != rec.original.query && on_front(&q.query);
        for d in &q.dim_scores {
            w.write_record([
                q.query.as_str(),
                d.name.as_str(),
                &format!("{:.6}", d.value),
                if front { "true" } else { "false" },
            ])
            .map_err(csv_err)?;
        }
    }
    finish_csv(w)
}

/// Everything needed to reproduce an evaluation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub prompt_version: String,
    pub config: EngineConfig,
    pub methods: Vec<Method>,
    pub topics: Vec<String>,
    /// Input file name → hex SHA-256 of its contents.
    pub inputs: BTreeMap<String, String>,
}

impl RunManifest {
    pub fn new(config: &EngineConfig, methods: &[Method], topics: &[QueryTopic]) -> Self {
        RunManifest {
            prompt_version: PROMPT_VERSION.to_string(),
            config: config.clone(),
            methods: methods.to_vec(),
            topics: topics.iter().map(|t| t.topic_id.clone()).collect(),
            inputs: BTreeMap::new(),
        }
    }

    pub fn add_input(&mut self, label: &str, path: impl AsRef<Path>) -> Result<()> {
        self.inputs.insert(label.to_string(), file_sha256(path)?);
        Ok(())
    }
}

pub fn file_sha256(path: impl AsRef<Path>) -> Result<String> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}
