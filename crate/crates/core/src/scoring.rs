//! Dimension scores for a candidate query: one diversity score per configured attribute
//! dimension, followed by the relevance of the candidate's results to the original results.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Distribution, Document, UnlabeledPolicy};
use crate::error::{Error, Result};
use crate::index::{Index, ResultSet};
use crate::pareto::Orientation;
use crate::tokenize::tokenize;

/// Sparse term counts over a document's title and text.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BowVector(pub BTreeMap<String, u32>);

impl BowVector {
    pub fn from_text(text: &str) -> Self {
        let mut counts = BTreeMap::new();
        for t in tokenize(text) {
            *counts.entry(t).or_insert(0) += 1;
        }
        BowVector(counts)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    fn squared_norm(&self) -> f64 {
        self.0.values().map(|&c| (c as f64) * (c as f64)).sum()
    }

    /// Cosine similarity; 0 if either vector is empty.
    pub fn cosine(&self, other: &BowVector) -> f64 {
        let (small, large) = if self.0.len() <= other.0.len() {
            (self, other)
        } else {
            (other, self)
        };
        let dot: f64 = small
            .0
            .iter()
            .filter_map(|(t, &c)| large.0.get(t).map(|&d| c as f64 * d as f64))
            .sum();
        // integer counts keep the product exact, so identical vectors give exactly 1
        let denom = (self.squared_norm() * other.squared_norm()).sqrt();
        if denom == 0.0 {
            0.0
        } else {
            (dot / denom).clamp(0.0, 1.0)
        }
    }
}

pub fn bow_vector(doc: &Document) -> BowVector {
    let mut v = BowVector::from_text(&doc.title);
    for (t, c) in BowVector::from_text(&doc.text).0 {
        *v.0.entry(t).or_insert(0) += c;
    }
    v
}

/// Harmonic mean of the two directed mean-of-best-match cosines between the sets.
pub fn doc_set_relevance(a: &[&Document], b: &[&Document]) -> f64 {
    let va: Vec<BowVector> = a.iter().map(|d| bow_vector(d)).collect();
    let vb: Vec<BowVector> = b.iter().map(|d| bow_vector(d)).collect();
    bow_set_relevance(&va, &vb)
}

pub fn bow_set_relevance(a: &[BowVector], b: &[BowVector]) -> f64 {
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    let m_ab = mean_best_match(a, b);
    let m_ba = mean_best_match(b, a);
    if m_ab + m_ba == 0.0 {
        return 0.0;
    }
    2.0 * m_ab * m_ba / (m_ab + m_ba)
}

fn mean_best_match(from: &[BowVector], to: &[BowVector]) -> f64 {
    let total: f64 = from
        .iter()
        .map(|x| to.iter().map(|y| x.cosine(y)).fold(0.0, f64::max))
        .sum();
    total / from.len() as f64
}

/// Jensen-Shannon divergence in bits, so the result lies in [0, 1].
///
/// Evaluated as `1 + ½ Σ_{p,q>0} [p·log2(p/(p+q)) + q·log2(q/(p+q))]`, which equals the
/// usual `½KL(P‖M) + ½KL(Q‖M)` for normalized inputs and gives exactly 1 for disjoint
/// supports.
pub fn jsd(p: &Distribution, q: &Distribution) -> Result<f64> {
    if p.is_empty() || q.is_empty() {
        return Err(Error::EmptyDistribution);
    }
    if p.probs == q.probs {
        return Ok(0.0);
    }
    let mut overlap = 0.0;
    for (cat, &pv) in &p.probs {
        let qv = q.prob(cat);
        if pv > 0.0 && qv > 0.0 {
            let s = pv + qv;
            overlap += pv * (pv / s).log2() + qv * (qv / s).log2();
        }
    }
    Ok((1.0 + 0.5 * overlap).clamp(0.0, 1.0))
}

/// Divergence between the attribute distributions of two result sets. Two empty
/// distributions score 0; exactly one empty scores 1.
pub fn entropy_score(
    candidate: &ResultSet,
    original: &ResultSet,
    dimension: &str,
    corpus: &Corpus,
    policy: UnlabeledPolicy,
) -> Result<f64> {
    let c = corpus.distribution(&corpus.resolve(candidate.doc_ids()), dimension, policy)?;
    let o = corpus.distribution(&corpus.resolve(original.doc_ids()), dimension, policy)?;
    divergence_with_empty_policy(&c, &o)
}

fn divergence_with_empty_policy(c: &Distribution, o: &Distribution) -> Result<f64> {
    match (c.is_empty(), o.is_empty()) {
        (true, true) => Ok(0.0),
        (true, false) | (false, true) => Ok(1.0),
        (false, false) => jsd(c, o),
    }
}

/// Per-document ±1 labels for one attribute dimension.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SignedLabels(pub HashMap<String, i8>);

impl SignedLabels {
    /// Reads the first label of `dimension` for each document, accepting `+1`, `1`, `-1`
    /// (and `+`/`-`). Documents with no parsable label are left out.
    pub fn from_corpus(corpus: &Corpus, dimension: &str) -> Result<Self> {
        if !corpus.schema().contains(dimension) {
            return Err(Error::UnknownDimension(dimension.to_string()));
        }
        let map = corpus
            .documents()
            .iter()
            .filter_map(|d| {
                let sign = match d.labels(dimension).first()?.as_str() {
                    "+1" | "1" | "+" => 1,
                    "-1" | "−1" | "-" => -1,
                    _ => return None,
                };
                Some((d.doc_id.clone(), sign))
            })
            .collect();
        Ok(SignedLabels(map))
    }
}

/// Mean of the ±1 labels of the returned documents.
///
/// Ten results with two `+1` and eight `-1` give `-0.6`. That example is sometimes
/// quoted as scoring `-8`, which is neither the mean (`-0.6`) nor the sum (`-6`); this
/// function always returns the mean.
pub fn signed_bias(results: &ResultSet, labeling: &SignedLabels) -> Result<f64> {
    if results.is_empty() {
        return Err(Error::EmptyResultSet);
    }
    let mut sum = 0i64;
    for id in results.doc_ids() {
        let l = labeling
            .0
            .get(id)
            .ok_or_else(|| Error::MissingBiasLabel(id.to_string()))?;
        sum += *l as i64;
    }
    Ok(sum as f64 / results.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DimensionKind {
    EntropyVsOriginal { attribute: String },
    SignedMean { attribute: String },
    Relevance,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DimensionSpec {
    pub name: String,
    #[serde(flatten)]
    pub kind: DimensionKind,
    #[serde(default)]
    pub orientation: Option<Orientation>,
}

impl DimensionSpec {
    pub fn entropy(attribute: &str) -> Self {
        DimensionSpec {
            name: format!("{attribute}_entropy"),
            kind: DimensionKind::EntropyVsOriginal {
                attribute: attribute.to_string(),
            },
            orientation: None,
        }
    }

    pub fn signed(attribute: &str) -> Self {
        DimensionSpec {
            name: format!("{attribute}_bias"),
            kind: DimensionKind::SignedMean {
                attribute: attribute.to_string(),
            },
            orientation: None,
        }
    }

    pub fn relevance() -> Self {
        DimensionSpec {
            name: "relevance".into(),
            kind: DimensionKind::Relevance,
            orientation: None,
        }
    }

    pub fn with_orientation(mut self, o: Orientation) -> Self {
        self.orientation = Some(o);
        self
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation.unwrap_or(match self.kind {
            DimensionKind::SignedMean { .. } => Orientation::MinimizeAbs,
            _ => Orientation::Maximize,
        })
    }
}

/// Default layout: one entropy dimension per attribute, then relevance.
pub fn default_dimensions(attributes: &[String]) -> Vec<DimensionSpec> {
    attributes
        .iter()
        .map(|a| DimensionSpec::entropy(a))
        .chain(std::iter::once(DimensionSpec::relevance()))
        .collect()
}

/// Checks that there is exactly one relevance dimension, that it comes last and that
/// names are unique.
pub fn validate_dimensions(dims: &[DimensionSpec]) -> Result<()> {
    let rel = dims
        .iter()
        .filter(|d| d.kind == DimensionKind::Relevance)
        .count();
    if rel != 1 {
        return Err(Error::InvalidParameter(format!(
            "expected exactly one relevance dimension, found {rel}"
        )));
    }
    if dims.last().map(|d| &d.kind) != Some(&DimensionKind::Relevance) {
        return Err(Error::InvalidParameter(
            "relevance must be the last dimension".into(),
        ));
    }
    let mut names = std::collections::HashSet::new();
    if let Some(d) = dims.iter().find(|d| !names.insert(d.name.as_str())) {
        return Err(Error::InvalidParameter(format!(
            "duplicate dimension name `{}`",
            d.name
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimScore {
    pub name: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredQuery {
    pub query: String,
    pub result_set: ResultSet,
    pub dim_scores: Vec<DimScore>,
}

impl ScoredQuery {
    pub fn values(&self) -> Vec<f64> {
        self.dim_scores.iter().map(|d| d.value).collect()
    }

    pub fn score(&self, name: &str) -> Option<f64> {
        self.dim_scores
            .iter()
            .find(|d| d.name == name)
            .map(|d| d.value)
    }

    pub fn relevance(&self) -> f64 {
        self.dim_scores.last().map_or(0.0, |d| d.value)
    }
}

/// Scores candidates against a fixed original result set. Caches the original's
/// bag-of-words vectors and distributions.
pub struct Scorer<'a> {
    index: &'a Index,
    corpus: &'a Corpus,
    dims: &'a [DimensionSpec],
    policy: UnlabeledPolicy,
    n: usize,
    original: ResultSet,
    original_bows: Vec<BowVector>,
    original_dists: HashMap<String, Distribution>,
    signed: HashMap<String, SignedLabels>,
}

impl<'a> Scorer<'a> {
    pub fn new(
        index: &'a Index,
        corpus: &'a Corpus,
        dims: &'a [DimensionSpec],
        policy: UnlabeledPolicy,
        n: usize,
        original: ResultSet,
    ) -> Result<Self> {
        validate_dimensions(dims)?;
        let docs = corpus.resolve(original.doc_ids());
        let original_bows = docs.iter().map(|d| bow_vector(d)).collect();
        let mut original_dists = HashMap::new();
        let mut signed = HashMap::new();
        for d in dims {
            match &d.kind {
                DimensionKind::EntropyVsOriginal { attribute } => {
                    original_dists.insert(
                        attribute.clone(),
                        corpus.distribution(&docs, attribute, policy)?,
                    );
                }
                DimensionKind::SignedMean { attribute } => {
                    signed.insert(
                        attribute.clone(),
                        SignedLabels::from_corpus(corpus, attribute)?,
                    );
                }
                DimensionKind::Relevance => {}
            }
        }
        Ok(Scorer {
            index,
            corpus,
            dims,
            policy,
            n,
            original,
            original_bows,
            original_dists,
            signed,
        })
    }

    pub fn original(&self) -> &ResultSet {
        &self.original
    }

    pub fn dims(&self) -> &[DimensionSpec] {
        self.dims
    }

    /// Runs the candidate through the index and scores it.
    pub fn score(&self, candidate_query: &str) -> Result<ScoredQuery> {
        let rs = self.index.search(candidate_query, self.n)?;
        self.score_results(candidate_query, rs)
    }

    pub fn score_results(&self, candidate_query: &str, rs: ResultSet) -> Result<ScoredQuery> {
        let docs = self.corpus.resolve(rs.doc_ids());
        let mut dim_scores = Vec::with_capacity(self.dims.len());
        for d in self.dims {
            let value = match &d.kind {
                DimensionKind::EntropyVsOriginal { attribute } => {
                    let c = self.corpus.distribution(&docs, attribute, self.policy)?;
                    divergence_with_empty_policy(&c, &self.original_dists[attribute])?
                }
                DimensionKind::SignedMean { attribute } => {
                    signed_bias(&rs, &self.signed[attribute])?
                }
                DimensionKind::Relevance => {
                    let bows: Vec<BowVector> = docs.iter().map(|d| bow_vector(d)).collect();
                    bow_set_relevance(&bows, &self.original_bows)
                }
            };
            dim_scores.push(DimScore {
                name: d.name.clone(),
                value,
            });
        }
        Ok(ScoredQuery {
            query: candidate_query.to_string(),
            result_set: rs,
            dim_scores,
        })
    }
}

/// Searches `candidate_query` and scores it against `original`.
pub fn dim_scores(
    candidate_query: &str,
    original: &ResultSet,
    dims: &[DimensionSpec],
    index: &Index,
    corpus: &Corpus,
    n: usize,
    policy: UnlabeledPolicy,
) -> Result<ScoredQuery> {
    Scorer::new(index, corpus, dims, policy, n, original.clone())?.score(candidate_query)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Schema;

    fn doc(id: &str, text: &str) -> Document {
        Document {
            doc_id: id.into(),
            title: String::new(),
            url: None,
            text: text.into(),
            attributes: Default::default(),
            quality: None,
        }
    }

    fn dist(pairs: &[(&str, f64)]) -> Distribution {
        Distribution {
            probs: pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            support_count: 1,
            policy: UnlabeledPolicy::ExcludeUnlabeled,
        }
    }

    fn kl_bits(p: &Distribution, m: &BTreeMap<String, f64>) -> f64 {
        p.probs
            .iter()
            .filter(|(_, &v)| v > 0.0)
            .map(|(k, &v)| v * (v / m[k]).log2())
            .sum()
    }

    // Textbook definition via the mixture distribution.
    fn jsd_oracle(p: &Distribution, q: &Distribution) -> f64 {
        let mut m = BTreeMap::new();
        for k in p.probs.keys().chain(q.probs.keys()) {
            m.insert(k.clone(), 0.5 * (p.prob(k) + q.prob(k)));
        }
        0.5 * kl_bits(p, &m) + 0.5 * kl_bits(q, &m)
    }

    #[test]
    fn bow_examples() {
        let v = bow_vector(&doc("d", "a b a"));
        assert_eq!(v.0.get("a"), Some(&2));
        assert_eq!(v.0.get("b"), Some(&1));
        assert!(bow_vector(&doc("d", "")).is_empty());
        assert_eq!(bow_vector(&doc("d", "A, b! a")), v);
    }

    #[test]
    fn bow_includes_title() {
        let mut d = doc("d", "b");
        d.title = "A".into();
        assert_eq!(bow_vector(&d).0.len(), 2);
    }

    #[test]
    fn relevance_examples() {
        let ab = doc("1", "a b");
        let cd = doc("2", "c d");
        assert!((doc_set_relevance(&[&ab, &cd], &[&ab]) - 2.0 / 3.0).abs() < 1e-9);
        assert!((doc_set_relevance(&[&ab, &cd], &[&ab, &cd]) - 1.0).abs() < 1e-12);
        assert_eq!(doc_set_relevance(&[&ab], &[&cd]), 0.0);
        assert_eq!(doc_set_relevance(&[], &[&cd]), 0.0);
    }

    #[test]
    fn jsd_examples() {
        let x = dist(&[("X", 1.0)]);
        let y = dist(&[("Y", 1.0)]);
        let half = dist(&[("X", 0.5), ("Y", 0.5)]);
        assert_eq!(jsd(&x, &x).unwrap(), 0.0);
        assert_eq!(jsd(&x, &y).unwrap(), 1.0);
        let v = jsd(&x, &half).unwrap();
        assert!((v - 0.3113).abs() < 1e-4);
        assert!((v - jsd_oracle(&x, &half)).abs() < 1e-12);
    }

    #[test]
    fn jsd_rejects_empty() {
        let empty = Distribution::from_counts(BTreeMap::new(), UnlabeledPolicy::ExcludeUnlabeled);
        assert!(matches!(
            jsd(&empty, &dist(&[("X", 1.0)])),
            Err(Error::EmptyDistribution)
        ));
    }

    #[test]
    fn signed_bias_examples() {
        let labels: Vec<i8> = vec![1, 1, -1, -1, -1, -1, -1, -1, -1, -1];
        let rs = ResultSet {
            query: "q".into(),
            hits: (0..10)
                .map(|i| crate::index::Hit {
                    doc_id: format!("d{i}"),
                    score: 1.0,
                })
                .collect(),
            n_requested: 10,
        };
        let labeling = SignedLabels(
            labels
                .iter()
                .enumerate()
                .map(|(i, &l)| (format!("d{i}"), l))
                .collect(),
        );
        assert_eq!(signed_bias(&rs, &labeling).unwrap(), -0.6);

        let all_pos = SignedLabels((0..10).map(|i| (format!("d{i}"), 1)).collect());
        assert_eq!(signed_bias(&rs, &all_pos).unwrap(), 1.0);

        let empty = ResultSet {
            query: "q".into(),
            hits: vec![],
            n_requested: 10,
        };
        assert!(matches!(
            signed_bias(&empty, &labeling),
            Err(Error::EmptyResultSet)
        ));

        let partial = SignedLabels([("d0".to_string(), 1)].into());
        assert!(matches!(
            signed_bias(&rs, &partial),
            Err(Error::MissingBiasLabel(_))
        ));
    }

    #[test]
    fn signed_labels_parse_variants() {
        let mut docs = Vec::new();
        for (i, l) in ["+1", "-1", "1", "left", ""].iter().enumerate() {
            let mut d = doc(&format!("d{i}"), "x");
            if !l.is_empty() {
                d.attributes.insert("lean".into(), vec![l.to_string()]);
            }
            docs.push(d);
        }
        let c = Corpus::new(docs, Schema::new(["lean"])).unwrap();
        let s = SignedLabels::from_corpus(&c, "lean").unwrap();
        assert_eq!(s.0.len(), 3);
        assert_eq!(s.0["d1"], -1);
    }

    #[test]
    fn dimension_validation() {
        assert!(validate_dimensions(&default_dimensions(&["geo".into()])).is_ok());
        assert!(validate_dimensions(&[DimensionSpec::entropy("geo")]).is_err());
        assert!(
            validate_dimensions(&[DimensionSpec::relevance(), DimensionSpec::entropy("geo")])
                .is_err()
        );
        assert!(validate_dimensions(&[
            DimensionSpec::entropy("geo"),
            DimensionSpec::entropy("geo"),
            DimensionSpec::relevance()
        ])
        .is_err());
    }

    #[test]
    fn dimension_spec_serde_shape() {
        let d = DimensionSpec::entropy("geography");
        let json = serde_json::to_value(&d).unwrap();
        assert_eq!(json["kind"], "entropy-vs-original");
        assert_eq!(json["attribute"], "geography");
        let back: DimensionSpec = serde_json::from_value(json).unwrap();
        assert_eq!(back, d);
        assert_eq!(
            DimensionSpec::signed("p").orientation(),
            Orientation::MinimizeAbs
        );
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn arb_dist() -> impl Strategy<Value = Distribution> {
            prop::collection::btree_map(
                prop::sample::select(vec!["a", "b", "c", "d", "e"]),
                1usize..20,
                1..5,
            )
            .prop_map(|m| {
                Distribution::from_counts(
                    m.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
                    UnlabeledPolicy::ExcludeUnlabeled,
                )
            })
        }

        proptest! {
            #[test]
            fn jsd_matches_textbook_definition(p in arb_dist(), q in arb_dist()) {
                let v = jsd(&p, &q).unwrap();
                prop_assert!((v - jsd_oracle(&p, &q)).abs() < 1e-12);
                prop_assert_eq!(v.to_bits(), jsd(&q, &p).unwrap().to_bits());
                prop_assert!((0.0..=1.0).contains(&v));
            }

            #[test]
            fn relevance_symmetric_and_self_one(
                a in prop::collection::vec("[a-e]{1,2}( [a-e]{1,2}){0,4}", 1..6),
                b in prop::collection::vec("[a-e]{1,2}( [a-e]{1,2}){0,4}", 1..6),
            ) {
                let da: Vec<Document> = a.iter().enumerate().map(|(i, t)| doc(&i.to_string(), t)).collect();
                let db: Vec<Document> = b.iter().enumerate().map(|(i, t)| doc(&i.to_string(), t)).collect();
                let ra: Vec<&Document> = da.iter().collect();
                let rb: Vec<&Document> = db.iter().collect();
                let ab = doc_set_relevance(&ra, &rb);
                let ba = doc_set_relevance(&rb, &ra);
                prop_assert!((ab - ba).abs() < 1e-12);
                prop_assert!((0.0..=1.0 + 1e-12).contains(&ab));
                prop_assert!((doc_set_relevance(&ra, &ra) - 1.0).abs() < 1e-9);
            }
        }
    }
}
