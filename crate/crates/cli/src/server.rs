//! HTTP front end of the interactive service.

use std::sync::Arc;
use std::time::Instant;

use axum::body::Bytes;
use axum::extract::{Path, Request, State};
use axum::http::StatusCode;
use axum::middleware::{self, Next};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde_json::json;

use vosbench_core::interactive::wire::{ErrorBody, StartRequest, StartResponse, SubmitRequest, SubmitResponse};
use vosbench_core::interactive::{InteractiveService, ServiceError, SessionState};

use crate::diag;

/// Environment variable that scales the per-round time budget.
pub const BUDGET_SCALE_ENV: &str = "VOSBENCH_SESSION_BUDGET_SCALE";

#[derive(Debug)]
struct ApiError {
    status: StatusCode,
    kind: &'static str,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, kind: &'static str, message: impl ToString) -> Self {
        Self {
            status,
            kind,
            message: message.to_string(),
        }
    }
}

impl From<ServiceError> for ApiError {
    fn from(e: ServiceError) -> Self {
        let (status, kind) = match &e {
            ServiceError::UnknownSequence(_) => (StatusCode::NOT_FOUND, "unknown-sequence"),
            ServiceError::UnknownSession(_) => (StatusCode::NOT_FOUND, "unknown-session"),
            ServiceError::Conflict(_) => (StatusCode::CONFLICT, "conflict"),
            ServiceError::Closed { .. } => (StatusCode::GONE, "closed"),
            ServiceError::Rejected(_) | ServiceError::Candidate { .. } => {
                (StatusCode::UNPROCESSABLE_ENTITY, "rejected")
            }
            ServiceError::Load(_) | ServiceError::Scribbles(_) => (StatusCode::INTERNAL_SERVER_ERROR, "internal"),
        };
        Self::new(status, kind, e)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = ErrorBody {
            error: self.message,
            kind: self.kind.to_string(),
        };
        (self.status, Json(body)).into_response()
    }
}

fn parse<T: serde::de::DeserializeOwned>(body: &[u8]) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "bad-request", e))
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> Result<T, ApiError> + Send + 'static) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e))?
}

async fn health() -> Json<serde_json::Value> {
    Json(json!({"status": "ok"}))
}

async fn start(State(svc): State<Arc<InteractiveService>>, body: Bytes) -> Result<Json<StartResponse>, ApiError> {
    let req: StartRequest = parse(&body)?;
    blocking(move || {
        let (session_id, scribbles) = svc.start_session(&req.sequence)?;
        Ok(Json(StartResponse { session_id, scribbles }))
    })
    .await
}

async fn submit(
    State(svc): State<Arc<InteractiveService>>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<Json<SubmitResponse>, ApiError> {
    let req: SubmitRequest = parse(&body)?;
    blocking(move || {
        let (sequence, _, state) = svc.status(&id)?;
        if state != SessionState::Open {
            return Err(ServiceError::Closed { id, state }.into());
        }
        let masks = req
            .to_sequence(&sequence)
            .map_err(|e| ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "rejected", e))?;
        let outcome = svc.submit_masks(&id, &masks, req.candidate_frames.as_deref())?;
        Ok(Json(outcome.into()))
    })
    .await
}

async fn log_request(req: Request, next: Next) -> Response {
    let (method, path) = (req.method().to_string(), req.uri().path().to_string());
    let t0 = Instant::now();
    let res = next.run(req).await;
    diag::info(
        "request",
        json!({
            "method": method,
            "path": path,
            "status": res.status().as_u16(),
            "elapsed_ms": t0.elapsed().as_secs_f64() * 1000.0,
        }),
    );
    res
}

/// Routes of the wire protocol.
pub fn router(service: Arc<InteractiveService>) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/session", post(start))
        .route("/session/{id}/masks", post(submit))
        .with_state(service)
}

/// Like [`router`], with one log line per request on stderr.
pub fn logged_router(service: Arc<InteractiveService>) -> Router {
    router(service).layer(middleware::from_fn(log_request))
}
