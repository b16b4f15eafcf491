//! Read-only HTTP/JSON service over a [`Snapshot`].

use std::sync::Arc;

use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;

use crate::api::{self, ErrorBody, Health, RecommendRequest, TopicList};
use crate::snapshot::{is_user_error, Snapshot};

pub fn router(snapshot: Arc<Snapshot>) -> Router {
    Router::new()
        .route("/api/health", get(health))
        .route("/api/search", get(search))
        .route("/api/recommend", post(recommend))
        .route("/api/topics", get(topics))
        .fallback(not_found)
        .with_state(snapshot)
}

pub async fn serve(snapshot: Arc<Snapshot>, addr: &str) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!(
        "listening on http://{} ({} documents)",
        listener.local_addr()?,
        snapshot.corpus.len()
    );
    axum::serve(listener, router(snapshot))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}

pub struct ApiError {
    status: StatusCode,
    body: ErrorBody,
}

impl ApiError {
    fn new(status: StatusCode, error: &str, detail: impl ToString) -> Self {
        ApiError {
            status,
            body: ErrorBody {
                error: error.into(),
                detail: detail.to_string(),
            },
        }
    }
}

impl From<bqr_core::Error> for ApiError {
    fn from(e: bqr_core::Error) -> Self {
        let root = match &e {
            bqr_core::Error::Iteration { source, .. } => source.as_ref(),
            other => other,
        };
        match root {
            bqr_core::Error::Provider(_) | bqr_core::Error::UnparseableResponse { .. } => {
                ApiError::new(StatusCode::BAD_GATEWAY, "provider_error", e)
            }
            _ if is_user_error(&e) => {
                ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid_request", e)
            }
            _ => ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal_error", e),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;

async fn health(State(snap): State<Arc<Snapshot>>) -> Json<Health> {
    Json(Health {
        status: "ok".into(),
        docs: snap.corpus.len(),
    })
}

#[derive(Deserialize)]
struct SearchParams {
    q: String,
    n: Option<usize>,
}

async fn search(
    State(snap): State<Arc<Snapshot>>,
    params: Result<Query<SearchParams>, QueryRejection>,
) -> ApiResult<api::SearchResponse> {
    let Query(p) =
        params.map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "bad_query", e.body_text()))?;
    let n = p.n.unwrap_or(snap.config.n);
    Ok(Json(api::search(&snap, &p.q, n)?))
}

async fn recommend(
    State(snap): State<Arc<Snapshot>>,
    body: Result<Json<RecommendRequest>, JsonRejection>,
) -> ApiResult<api::RecommendResponse> {
    let Json(req) =
        body.map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "bad_body", e.body_text()))?;
    // scoring fans out over rayon; keep it off the async workers
    let out = tokio::task::spawn_blocking(move || api::recommend_request(&snap, &req))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal_error", e))??;
    Ok(Json(out.1))
}

async fn topics(State(snap): State<Arc<Snapshot>>) -> Json<TopicList> {
    Json(TopicList {
        topics: snap.topics.clone(),
    })
}

async fn not_found() -> ApiError {
    ApiError::new(StatusCode::NOT_FOUND, "not_found", "no such endpoint")
}
