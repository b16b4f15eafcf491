use std::path::PathBuf;
use std::sync::Arc;

use axum::body::{to_bytes, Body};
use axum::http::{Request, StatusCode};
use bqr_cli::api::{self, RecommendRequest};
use bqr_cli::service::router;
use bqr_cli::snapshot::load_config;
use bqr_cli::{DataPaths, Snapshot};
use bqr_core::{recommend, Method};
use serde_json::{json, Value};
use tower::ServiceExt;

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../data/synthetic")
        .join(name)
}

fn snapshot() -> Arc<Snapshot> {
    let paths = DataPaths {
        corpus: Some(data("corpus.jsonl")),
        topics: Some(data("topics.jsonl")),
        embeddings: Some(data("glove.txt")),
        fixtures: Some(data("fixtures.json")),
        schema: Some(data("schema.json")),
        index: None,
    };
    let config = load_config(Some(&data("config.toml"))).unwrap();
    Arc::new(Snapshot::load(&paths, config).unwrap())
}

async fn call(snap: &Arc<Snapshot>, req: Request<Body>) -> (StatusCode, Value) {
    let resp = router(snap.clone()).oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = to_bytes(resp.into_body(), usize::MAX).await.unwrap();
    (status, serde_json::from_slice(&bytes).unwrap())
}

fn get(uri: &str) -> Request<Body> {
    Request::get(uri).body(Body::empty()).unwrap()
}

fn post(uri: &str, body: Value) -> Request<Body> {
    Request::post(uri)
        .header("content-type", "application/json")
        .body(Body::from(body.to_string()))
        .unwrap()
}

#[tokio::test]
async fn health_reports_document_count() {
    let snap = snapshot();
    let (status, body) = call(&snap, get("/api/health")).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body, json!({"status": "ok", "docs": snap.corpus.len()}));
}

#[tokio::test]
async fn search_hits_resolve_and_carry_distributions() {
    let snap = snapshot();
    let (status, body) = call(&snap, get("/api/search?q=politics&n=20")).await;
    assert_eq!(status, StatusCode::OK);
    let hits = body["hits"].as_array().unwrap();
    assert_eq!(hits.len(), 20);
    for h in hits {
        assert!(snap.corpus.get(h["doc_id"].as_str().unwrap()).is_some());
        assert!(h["score"].as_f64().unwrap().is_finite());
    }
    let geo: f64 = body["distributions"]["geography"]["probs"]
        .as_object()
        .unwrap()
        .values()
        .map(|v| v.as_f64().unwrap())
        .sum();
    assert!((geo - 1.0).abs() < 1e-12);
}

#[tokio::test]
async fn unknown_term_gives_empty_hits_and_distributions() {
    let snap = snapshot();
    let (status, body) = call(&snap, get("/api/search?q=qwertyuiop")).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["hits"], json!([]));
    for dim in ["geography", "gender"] {
        assert_eq!(body["distributions"][dim]["probs"], json!({}));
    }
}

#[tokio::test]
async fn recommend_matches_in_process_engine() {
    let snap = snapshot();
    let (status, body) = call(
        &snap,
        post(
            "/api/recommend",
            json!({"query": "politics", "method": "m2"}),
        ),
    )
    .await;
    assert_eq!(status, StatusCode::OK, "{body}");

    let config = bqr_core::EngineConfig {
        method: Method::LlmSimilar,
        ..snap.config.clone()
    };
    let rec = recommend(
        "politics",
        &snap.topic_keywords("politics"),
        &config,
        &snap.resources(),
    )
    .unwrap();
    let direct = api::recommend_response(&snap, &rec).unwrap();
    // both sides go through the same text parse so float formatting cannot differ
    let normalized: Value = serde_json::from_str(&serde_json::to_string(&direct).unwrap()).unwrap();
    assert_eq!(body, normalized);

    let served: Vec<&str> = body["recommendations"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["query"].as_str().unwrap())
        .collect();
    assert_eq!(served, rec.rec_queries());
    for r in body["recommendations"].as_array().unwrap() {
        let names: Vec<&str> = r["dim_scores"]
            .as_array()
            .unwrap()
            .iter()
            .map(|d| d["name"].as_str().unwrap())
            .collect();
        assert_eq!(names, ["geography_entropy", "gender_entropy", "relevance"]);
    }
}

#[tokio::test]
async fn identical_requests_give_identical_bodies() {
    let snap = snapshot();
    let req = json!({"query": "religion", "method": "m3", "k": 5, "n": 20});
    let (_, a) = call(&snap, post("/api/recommend", req.clone())).await;
    let (_, b) = call(&snap, post("/api/recommend", req)).await;
    assert_eq!(a, b);
    assert!(a["trace_summary"]["iterations_used"].as_u64().unwrap() <= 4);
}

#[tokio::test]
async fn topics_are_listed() {
    let snap = snapshot();
    let (status, body) = call(&snap, get("/api/topics")).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["topics"].as_array().unwrap().len(), snap.topics.len());
}

#[tokio::test]
async fn errors_are_json_with_status() {
    let snap = snapshot();
    let cases = [
        (get("/api/search"), StatusCode::BAD_REQUEST),
        (
            get("/api/search?q=politics&n=0"),
            StatusCode::UNPROCESSABLE_ENTITY,
        ),
        (
            post(
                "/api/recommend",
                json!({"query": "politics", "method": "m9"}),
            ),
            StatusCode::BAD_REQUEST,
        ),
        (
            post("/api/recommend", json!({"query": ""})),
            StatusCode::UNPROCESSABLE_ENTITY,
        ),
        (
            post("/api/recommend", json!({"query": "jazz", "method": "m3"})),
            StatusCode::UNPROCESSABLE_ENTITY,
        ),
        // no fixture was recorded for k=2
        (
            post(
                "/api/recommend",
                json!({"query": "politics", "method": "m2", "k": 2}),
            ),
            StatusCode::BAD_GATEWAY,
        ),
        (get("/api/nope"), StatusCode::NOT_FOUND),
    ];
    for (req, want) in cases {
        let uri = req.uri().to_string();
        let (status, body) = call(&snap, req).await;
        assert_eq!(status, want, "{uri}: {body}");
        assert!(
            body["error"].is_string() && body["detail"].is_string(),
            "{uri}: {body}"
        );
    }
}

#[test]
fn request_fields_override_config() {
    let base = bqr_core::EngineConfig::default();
    let req = RecommendRequest {
        query: "x".into(),
        k: Some(3),
        n: Some(7),
        method: Some(Method::Embedding),
        ..Default::default()
    };
    let c = req.config(&base);
    assert_eq!(
        (c.k, c.n, c.method, c.max_iter),
        (3, 7, Method::Embedding, base.max_iter)
    );
}
