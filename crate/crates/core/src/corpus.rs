//! Corpus and query-topic ingestion, plus attribute distributions over document subsets.
//!
//! Both files are JSON-Lines. A corpus line looks like
//!
//! ```text
//! {"doc_id":"d1","title":"David Easton","text":"...","attributes":{"geography":["Northern America"],"gender":["male"]}}
//! ```
//!
//! A document without an `attributes` object is unlabeled in every dimension.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{Error, Result};

/// Category used for unlabeled documents under [`UnlabeledPolicy::AsCategory`].
pub const UNLABELED: &str = "⟂unlabeled";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub doc_id: String,
    #[serde(default)]
    pub title: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub url: Option<String>,
    #[serde(default)]
    pub text: String,
    #[serde(default, deserialize_with = "de_attributes")]
    pub attributes: BTreeMap<String, Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quality: Option<f64>,
}

impl Document {
    /// Labels for `dimension`; empty when the document is unlabeled there.
    pub fn labels(&self, dimension: &str) -> &[String] {
        self.attributes
            .get(dimension)
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }
}

// Accept `"label"`, `["a","b"]` or `null` per dimension.
fn de_attributes<'de, D>(de: D) -> std::result::Result<BTreeMap<String, Vec<String>>, D::Error>
where
    D: Deserializer<'de>,
{
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Labels {
        One(String),
        Many(Vec<String>),
    }
    let raw: Option<BTreeMap<String, Option<Labels>>> = Option::deserialize(de)?;
    Ok(raw
        .unwrap_or_default()
        .into_iter()
        .map(|(dim, labels)| {
            let labels = match labels {
                None => Vec::new(),
                Some(Labels::One(s)) => vec![s],
                Some(Labels::Many(v)) => v,
            };
            let labels = labels
                .into_iter()
                .map(|l| l.trim().to_string())
                .filter(|l| !l.is_empty())
                .collect();
            (dim, labels)
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryTopic {
    pub topic_id: String,
    pub title: String,
    pub keywords: Vec<String>,
    pub relevant_docs: Vec<String>,
}

#[derive(Deserialize)]
struct RawTopic {
    #[serde(alias = "id")]
    topic_id: Option<IdRepr>,
    title: Option<String>,
    #[serde(default)]
    keywords: Vec<String>,
    #[serde(default, alias = "rel_docs")]
    relevant_docs: Vec<IdRepr>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum IdRepr {
    Str(String),
    Num(i64),
}

impl IdRepr {
    fn into_string(self) -> String {
        match self {
            IdRepr::Str(s) => s,
            IdRepr::Num(n) => n.to_string(),
        }
    }
}

/// Attribute dimensions the corpus is labeled with.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Schema {
    pub dimensions: Vec<String>,
}

impl Schema {
    pub fn new<I, S>(dims: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Schema {
            dimensions: dims.into_iter().map(Into::into).collect(),
        }
    }

    /// Reads a JSON array of dimension names.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let raw = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&raw)?)
    }

    pub fn contains(&self, dimension: &str) -> bool {
        self.dimensions.iter().any(|d| d == dimension)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UnlabeledPolicy {
    /// Unlabeled documents contribute nothing.
    #[default]
    ExcludeUnlabeled,
    /// Each unlabeled document contributes one count to [`UNLABELED`].
    UnlabeledAsCategory,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Distribution {
    pub probs: BTreeMap<String, f64>,
    pub support_count: usize,
    pub policy: UnlabeledPolicy,
}

impl Distribution {
    pub fn is_empty(&self) -> bool {
        self.support_count == 0
    }

    /// Builds a distribution from raw category counts.
    pub fn from_counts(counts: BTreeMap<String, usize>, policy: UnlabeledPolicy) -> Self {
        let support_count: usize = counts.values().sum();
        let probs = counts
            .into_iter()
            .filter(|(_, c)| *c > 0)
            .map(|(k, c)| (k, c as f64 / support_count as f64))
            .collect();
        Distribution {
            probs,
            support_count,
            policy,
        }
    }

    pub fn prob(&self, category: &str) -> f64 {
        self.probs.get(category).copied().unwrap_or(0.0)
    }
}

/// An immutable, validated document collection.
#[derive(Debug, Clone)]
pub struct Corpus {
    schema: Schema,
    docs: Vec<Document>,
    by_id: HashMap<String, usize>,
}

impl Corpus {
    pub fn new(docs: Vec<Document>, schema: Schema) -> Result<Self> {
        let mut by_id = HashMap::with_capacity(docs.len());
        for (i, doc) in docs.iter().enumerate() {
            if doc.doc_id.is_empty() {
                return Err(Error::EmptyDocId { line: i + 1 });
            }
            if by_id.insert(doc.doc_id.clone(), i).is_some() {
                return Err(Error::DuplicateDocId(doc.doc_id.clone()));
            }
        }
        Ok(Corpus {
            schema,
            docs,
            by_id,
        })
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn documents(&self) -> &[Document] {
        &self.docs
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn get(&self, doc_id: &str) -> Option<&Document> {
        self.by_id.get(doc_id).map(|&i| &self.docs[i])
    }

    /// Resolves ids to documents, skipping unknown ones.
    pub fn resolve<'a, I>(&'a self, ids: I) -> Vec<&'a Document>
    where
        I: IntoIterator<Item = &'a str>,
    {
        ids.into_iter().filter_map(|id| self.get(id)).collect()
    }

    /// Checks that every topic's relevant documents exist in this corpus.
    pub fn validate_topics(&self, topics: &[QueryTopic]) -> Result<()> {
        for t in topics {
            if let Some(missing) = t.relevant_docs.iter().find(|d| self.get(d).is_none()) {
                return Err(Error::UnknownRelevantDoc {
                    topic: t.topic_id.clone(),
                    doc_id: missing.clone(),
                });
            }
        }
        Ok(())
    }

    pub fn distribution(
        &self,
        docs: &[&Document],
        dimension: &str,
        policy: UnlabeledPolicy,
    ) -> Result<Distribution> {
        if !self.schema.contains(dimension) {
            return Err(Error::UnknownDimension(dimension.to_string()));
        }
        Ok(count_labels(docs.iter().copied(), dimension, policy))
    }
}

/// Reads a JSON-Lines corpus. Blank lines are skipped; line numbers in errors are 1-based.
pub fn load_corpus(path: impl AsRef<Path>, schema: Schema) -> Result<Corpus> {
    let path = path.as_ref();
    let raw = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut docs = Vec::new();
    let mut seen = HashSet::new();
    for (i, line) in raw.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let doc: Document = serde_json::from_str(line).map_err(|e| Error::MalformedLine {
            path: path.to_path_buf(),
            line: line_no,
            message: e.to_string(),
        })?;
        if doc.doc_id.is_empty() {
            return Err(Error::EmptyDocId { line: line_no });
        }
        if !seen.insert(doc.doc_id.clone()) {
            return Err(Error::DuplicateDocId(doc.doc_id));
        }
        docs.push(doc);
    }
    Corpus::new(docs, schema)
}

/// Union of attribute keys seen in the corpus file, sorted. Used when no schema file is given.
pub fn infer_schema(docs: &[Document]) -> Schema {
    let dims: std::collections::BTreeSet<&str> = docs
        .iter()
        .flat_map(|d| d.attributes.keys().map(String::as_str))
        .collect();
    Schema::new(dims)
}

/// Reads JSON-Lines query topics in file order. Keywords are trimmed and lowercased.
pub fn load_queries(path: impl AsRef<Path>) -> Result<Vec<QueryTopic>> {
    let path = path.as_ref();
    let raw = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut topics = Vec::new();
    for (i, line) in raw.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let t: RawTopic = serde_json::from_str(line).map_err(|e| Error::MalformedLine {
            path: path.to_path_buf(),
            line: i + 1,
            message: e.to_string(),
        })?;
        let topic_id = t
            .topic_id
            .map(IdRepr::into_string)
            .unwrap_or_else(|| format!("line-{}", i + 1));
        let title = match t.title.map(|s| s.trim().to_string()) {
            Some(s) if !s.is_empty() => s,
            _ => return Err(Error::MissingTitle(topic_id)),
        };
        let keywords = t
            .keywords
            .into_iter()
            .map(|k| k.trim().to_lowercase())
            .filter(|k| !k.is_empty())
            .collect();
        topics.push(QueryTopic {
            topic_id,
            title,
            keywords,
            relevant_docs: t
                .relevant_docs
                .into_iter()
                .map(IdRepr::into_string)
                .collect(),
        });
    }
    Ok(topics)
}

/// Counts label occurrences for `dimension` and normalizes. A document with two labels
/// contributes two counts.
pub fn attribute_distribution<'a, I>(
    docs: I,
    dimension: &str,
    schema: &Schema,
    policy: UnlabeledPolicy,
) -> Result<Distribution>
where
    I: IntoIterator<Item = &'a Document>,
{
    if !schema.contains(dimension) {
        return Err(Error::UnknownDimension(dimension.to_string()));
    }
    Ok(count_labels(docs, dimension, policy))
}

fn count_labels<'a, I>(docs: I, dimension: &str, policy: UnlabeledPolicy) -> Distribution
where
    I: IntoIterator<Item = &'a Document>,
{
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for doc in docs {
        let labels = doc.labels(dimension);
        if labels.is_empty() {
            if policy == UnlabeledPolicy::UnlabeledAsCategory {
                *counts.entry(UNLABELED.to_string()).or_default() += 1;
            }
            continue;
        }
        for l in labels {
            *counts.entry(l.clone()).or_default() += 1;
        }
    }
    Distribution::from_counts(counts, policy)
}
