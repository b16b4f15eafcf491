mod common;

use bqr_core::eval::CellValue;
use bqr_core::{
    domination_score, method_matrix, recommend, Corpus, EmbeddingStore, EngineConfig, Error, Index,
    LlmProvider, Method, ReplayProvider, Resources, Schema,
};
use common::{doc, synthetic};

fn replay() -> ReplayProvider {
    ReplayProvider::load(common::data_dir().join("fixtures.json")).unwrap()
}

fn bundled_config(method: Method) -> EngineConfig {
    EngineConfig {
        k: 5,
        n: 20,
        max_iter: 4,
        method,
        ..Default::default()
    }
}

#[test]
fn matrix_cells_match_pairwise_scores() {
    let s = synthetic();
    let provider = replay();
    let res = Resources {
        index: &s.index,
        corpus: &s.corpus,
        store: Some(&s.store),
        provider: Some(&provider as &dyn LlmProvider),
    };
    let methods = [Method::Embedding, Method::LlmSimilar];
    let topics = &s.topics[..2];
    let config = bundled_config(Method::Embedding);
    let matrix = method_matrix(topics, &methods, &config, &res).unwrap();
    assert_eq!(matrix.cells.len(), 2 * 2 * 2);

    for topic in topics {
        let recs: Vec<_> = methods
            .iter()
            .map(|&m| {
                recommend(&topic.title, &topic.keywords, &bundled_config(m), &res)
                    .unwrap()
                    .recs
            })
            .collect();
        for (ia, &a) in methods.iter().enumerate() {
            for (ib, &b) in methods.iter().enumerate() {
                let want = domination_score(&recs[ia], &recs[ib], &matrix_dims(&s.corpus)).unwrap();
                assert_eq!(
                    matrix.cell(&topic.topic_id, a, b),
                    Some(&CellValue::Count(want)),
                    "{} {a} {b}",
                    topic.topic_id
                );
            }
        }
    }
    let csv = matrix.to_csv().unwrap();
    assert!(csv.starts_with("topic_id,method_a,method_b,score\n"));
    assert_eq!(csv.lines().filter(|l| l.starts_with("TOTAL")).count(), 4);
}

fn matrix_dims(corpus: &Corpus) -> Vec<bqr_core::DimensionSpec> {
    EngineConfig::default().resolved_dims(corpus)
}

#[test]
fn keywordless_topic_marks_method3_inapplicable() {
    let s = synthetic();
    let provider = replay();
    let res = Resources {
        index: &s.index,
        corpus: &s.corpus,
        store: Some(&s.store),
        provider: Some(&provider as &dyn LlmProvider),
    };
    let jazz: Vec<_> = s
        .topics
        .iter()
        .filter(|t| t.keywords.is_empty())
        .cloned()
        .collect();
    assert_eq!(jazz.len(), 1);
    let methods = [Method::LlmSimilar, Method::LlmKeywords];
    let m = method_matrix(&jazz, &methods, &bundled_config(Method::LlmSimilar), &res).unwrap();
    let id = &jazz[0].topic_id;
    assert!(matches!(
        m.cell(id, Method::LlmSimilar, Method::LlmSimilar),
        Some(CellValue::Count(_))
    ));
    assert_eq!(
        m.cell(id, Method::LlmKeywords, Method::LlmSimilar),
        Some(&CellValue::Inapplicable)
    );
    assert_eq!(m.failures.len(), 1);
}

#[test]
fn single_method_gives_one_self_cell_per_topic() {
    let s = synthetic();
    let res = Resources {
        index: &s.index,
        corpus: &s.corpus,
        store: Some(&s.store),
        provider: None,
    };
    let m = method_matrix(
        &s.topics,
        &[Method::Embedding],
        &bundled_config(Method::Embedding),
        &res,
    )
    .unwrap();
    assert_eq!(m.cells.len(), s.topics.len());
    assert_eq!(m.totals.len(), 1);
    assert!(m.totals[0].self_comparison);
}

#[test]
fn replay_miss_names_the_prompt() {
    let s = synthetic();
    let provider = replay();
    let res = Resources {
        index: &s.index,
        corpus: &s.corpus,
        store: Some(&s.store),
        provider: Some(&provider as &dyn LlmProvider),
    };
    // k=3 sends prompts that were never recorded
    let config = EngineConfig {
        k: 3,
        ..bundled_config(Method::LlmSimilar)
    };
    let err = recommend("politics", &[], &config, &res)
        .unwrap_err()
        .to_string();
    assert!(err.contains("politics"), "{err}");
}

#[test]
fn candidates_tying_the_original_are_never_recommended() {
    // every document carries both words, so both queries return the same set
    let docs: Vec<_> = (0..6)
        .map(|i| {
            doc(
                &format!("d{i}"),
                "alpha beta",
                &[("geography", if i % 2 == 0 { "X" } else { "Y" })],
            )
        })
        .collect();
    let corpus = Corpus::new(docs, Schema::new(["geography"])).unwrap();
    let index = Index::build(&corpus, Default::default()).unwrap();
    let store =
        EmbeddingStore::from_pairs([("alpha", vec![1.0, 0.0]), ("beta", vec![0.9, 0.1])]).unwrap();
    let res = Resources {
        index: &index,
        corpus: &corpus,
        store: Some(&store),
        provider: None,
    };
    let config = EngineConfig {
        k: 3,
        n: 6,
        max_iter: 3,
        method: Method::Embedding,
        ..Default::default()
    };
    let rec = recommend("alpha", &[], &config, &res).unwrap();
    assert_eq!(rec.scored.len(), 1);
    assert_eq!(rec.scored[0].values(), rec.original.values());
    assert!(rec.recs.is_empty());
}

#[test]
fn unknown_term_query_has_no_baseline() {
    let s = synthetic();
    let res = Resources {
        index: &s.index,
        corpus: &s.corpus,
        store: Some(&s.store),
        provider: None,
    };
    let err = recommend("zzzz", &[], &bundled_config(Method::Embedding), &res).unwrap_err();
    assert!(matches!(err, Error::UnscorableBaseline(_)));
}

#[test]
fn saved_index_answers_identically() {
    let s = synthetic();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("index.json");
    s.index.save(&path).unwrap();
    let loaded = Index::load(&path).unwrap();
    for q in ["politics", "classical music", "temple faith"] {
        assert_eq!(
            s.index.search(q, 20).unwrap(),
            loaded.search(q, 20).unwrap()
        );
    }
}

#[test]
fn politics_returns_a_full_page() {
    let s = synthetic();
    assert_eq!(s.index.search("politics", 20).unwrap().len(), 20);
}
