//! Candidate query generation.
//!
//! * `M1` uses the nearest embedding words as queries.
//! * `M2` prompts an LLM with the query and its nearest embedding words.
//! * `M3` prompts an LLM with the query and the topic's dataset keywords.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::QueryTopic;
use crate::embedding::EmbeddingStore;
use crate::error::{Error, Result};
use crate::llm::LlmProvider;

pub const PROMPT_VERSION: &str = "v1";
const PROMPT_TEMPLATE: &str = include_str!("../resources/prompt_v1.txt");

pub const DEFAULT_K: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "m1", alias = "M1")]
    Embedding,
    #[serde(rename = "m2", alias = "M2")]
    LlmSimilar,
    #[serde(rename = "m3", alias = "M3")]
    LlmKeywords,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Embedding, Method::LlmSimilar, Method::LlmKeywords];

    pub fn id(self) -> &'static str {
        match self {
            Method::Embedding => "m1",
            Method::LlmSimilar => "m2",
            Method::LlmKeywords => "m3",
        }
    }

    pub fn uses_llm(self) -> bool {
        !matches!(self, Method::Embedding)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "m1" | "embedding" => Ok(Method::Embedding),
            "m2" | "llm-similar" => Ok(Method::LlmSimilar),
            "m3" | "llm-keywords" => Ok(Method::LlmKeywords),
            other => Err(Error::InvalidParameter(format!("unknown method `{other}`"))),
        }
    }
}

/// Deduplicated, lowercased candidate queries, never equal to the origin query.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateBatch {
    pub method: Method,
    pub origin_query: String,
    pub queries: Vec<String>,
}

impl CandidateBatch {
    pub fn new<I, S>(method: Method, origin_query: &str, raw: I, k: usize) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let origin = normalize_query(origin_query);
        let mut seen = HashSet::new();
        let queries = raw
            .into_iter()
            .map(|q| normalize_query(q.as_ref()))
            .filter(|q| !q.is_empty() && *q != origin && seen.insert(q.clone()))
            .take(k)
            .collect();
        CandidateBatch {
            method,
            origin_query: origin_query.to_string(),
            queries,
        }
    }
}

/// Trims, lowercases and collapses internal whitespace.
pub fn normalize_query(q: &str) -> String {
    q.split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase()
}

/// The exact prompt sent to the LLM for `query` and its associated words.
pub fn render_prompt(query: &str, keywords: &[String]) -> String {
    PROMPT_TEMPLATE
        .replace("{query}", query.trim())
        .replace("{keywords}", &keywords.join(", "))
}

pub fn method1_embedding(store: &EmbeddingStore, query: &str, k: usize) -> Result<CandidateBatch> {
    let words = store.nearest_words(query, k, &HashSet::new())?;
    Ok(CandidateBatch::new(
        Method::Embedding,
        query,
        words.into_iter().map(|(w, _)| w),
        k,
    ))
}

pub fn method2_llm_with_similar(
    provider: &dyn LlmProvider,
    query: &str,
    similar: &[String],
    k: usize,
) -> Result<CandidateBatch> {
    if similar.is_empty() {
        return Err(Error::InvalidParameter(
            "method 2 needs at least one similar word".into(),
        ));
    }
    llm_batch(Method::LlmSimilar, provider, query, similar, k)
}

pub fn method3_llm_with_keywords(
    provider: &dyn LlmProvider,
    topic: &QueryTopic,
    k: usize,
) -> Result<CandidateBatch> {
    if topic.keywords.is_empty() {
        return Err(Error::MethodInapplicable(topic.topic_id.clone()));
    }
    llm_batch(
        Method::LlmKeywords,
        provider,
        &topic.title,
        &topic.keywords,
        k,
    )
}

/// Prompts the provider with `query` plus `words` and parses the reply.
pub fn llm_batch(
    method: Method,
    provider: &dyn LlmProvider,
    query: &str,
    words: &[String],
    k: usize,
) -> Result<CandidateBatch> {
    let prompt = render_prompt(query, words);
    let reply = provider.complete(&prompt)?;
    let parsed = parse_query_list(&reply)?;
    Ok(CandidateBatch::new(method, query, parsed, k))
}

/// Extracts queries from an LLM reply.
///
/// Numbered (`1.`, `2)`) and bulleted (`-`, `*`, `•`) lines win when present; any other
/// line is then treated as commentary. Without list markers every line that does not
/// read as a sentence (ending in `.`, `!`, `?` or `:`) is taken as a query.
pub fn parse_query_list(text: &str) -> Result<Vec<String>> {
    let lines: Vec<&str> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .collect();
    let listed: Vec<&str> = lines.iter().filter_map(|l| strip_marker(l)).collect();
    let items: Vec<&str> = if listed.is_empty() {
        lines
            .into_iter()
            .filter(|l| !l.ends_with(['.', '!', '?', ':']))
            .collect()
    } else {
        listed
    };

    let mut seen = HashSet::new();
    let out: Vec<String> = items
        .into_iter()
        .map(clean_item)
        .filter(|q| !q.is_empty() && seen.insert(q.clone()))
        .collect();
    if out.is_empty() {
        return Err(Error::UnparseableResponse {
            raw: text.to_string(),
        });
    }
    Ok(out)
}

fn strip_marker(line: &str) -> Option<&str> {
    for bullet in ["- ", "* ", "• "] {
        if let Some(rest) = line.strip_prefix(bullet) {
            return Some(rest);
        }
    }
    let digits = line.chars().take_while(char::is_ascii_digit).count();
    if digits > 0 {
        let rest = &line[digits..];
        if let Some(rest) = rest.strip_prefix('.').or_else(|| rest.strip_prefix(')')) {
            if rest.starts_with(char::is_whitespace) {
                return Some(rest);
            }
        }
    }
    None
}

fn clean_item(item: &str) -> String {
    let mut s = item.trim();
    loop {
        s = s
            .trim_matches('*')
            .trim()
            .trim_end_matches(['.', ',', ';'])
            .trim();
        let before = s;
        for (open, close) in [('"', '"'), ('\'', '\''), ('“', '”'), ('‘', '’'), ('`', '`')]
        {
            if s.len() >= 2 && s.starts_with(open) && s.ends_with(close) {
                s = s[open.len_utf8()..s.len() - close.len_utf8()].trim();
            }
        }
        if s == before {
            break;
        }
    }
    normalize_query(s)
}
