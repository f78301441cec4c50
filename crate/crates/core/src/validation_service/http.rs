use std::net::SocketAddr;
use std::sync::Arc;

use axum::extract::{Path, Query, State};
use axum::http::{HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;
use serde_json::json;

use super::{TaskState, TaskStore, ValidationError};

pub const VALIDATOR_HEADER: &str = "x-validator-id";

type Shared = Arc<TaskStore>;

struct ApiError(StatusCode, &'static str, String);

impl From<ValidationError> for ApiError {
    fn from(e: ValidationError) -> Self {
        let (status, code) = match &e {
            ValidationError::UnknownTask(_) => (StatusCode::NOT_FOUND, "UnknownTask"),
            ValidationError::TaskNotEligible(_) => (StatusCode::CONFLICT, "TaskNotEligible"),
            ValidationError::ValidatorExhausted => (StatusCode::CONFLICT, "ValidatorExhausted"),
            ValidationError::AlreadyClaimed => (StatusCode::CONFLICT, "AlreadyClaimed"),
            ValidationError::NotAssigned => (StatusCode::FORBIDDEN, "NotAssigned"),
            ValidationError::NoAttemptsLeft => (StatusCode::CONFLICT, "NoAttemptsLeft"),
            ValidationError::InvalidValidator(_) => (StatusCode::BAD_REQUEST, "InvalidValidator"),
            ValidationError::InvalidBudget
            | ValidationError::DuplicateTask(_)
            | ValidationError::InvalidGroundTruth(_) => (StatusCode::BAD_REQUEST, "BadRequest"),
            ValidationError::Io(_) => (StatusCode::INTERNAL_SERVER_ERROR, "StorageError"),
        };
        ApiError(status, code, e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(json!({ "error": self.1, "message": self.2 }))).into_response()
    }
}

fn validator(headers: &HeaderMap) -> Result<String, ApiError> {
    headers
        .get(VALIDATOR_HEADER)
        .and_then(|v| v.to_str().ok())
        .map(str::trim)
        .filter(|v| !v.is_empty())
        .map(str::to_string)
        .ok_or_else(|| {
            ApiError(
                StatusCode::BAD_REQUEST,
                "MissingValidator",
                format!("missing {VALIDATOR_HEADER} header"),
            )
        })
}

#[derive(Deserialize)]
struct ListQuery {
    state: Option<String>,
}

#[derive(Deserialize)]
struct AttemptBody {
    notation: String,
}

async fn list(
    State(store): State<Shared>,
    headers: HeaderMap,
    Query(q): Query<ListQuery>,
) -> Result<Response, ApiError> {
    let state = match q.state.as_deref() {
        None | Some("") => None,
        Some(s) => Some(
            s.parse::<TaskState>()
                .map_err(|e| ApiError(StatusCode::BAD_REQUEST, "BadState", e))?,
        ),
    };
    let who = validator(&headers).ok();
    Ok(Json(store.list(state, who.as_deref())).into_response())
}

async fn claim(
    State(store): State<Shared>,
    headers: HeaderMap,
    Path(id): Path<String>,
) -> Result<Response, ApiError> {
    Ok(Json(store.claim(&id, &validator(&headers)?)?).into_response())
}

async fn view(
    State(store): State<Shared>,
    headers: HeaderMap,
    Path(id): Path<String>,
) -> Result<Response, ApiError> {
    Ok(Json(store.view(&id, &validator(&headers)?)?).into_response())
}

async fn attempt(
    State(store): State<Shared>,
    headers: HeaderMap,
    Path(id): Path<String>,
    Json(body): Json<AttemptBody>,
) -> Result<Response, ApiError> {
    Ok(Json(store.submit_attempt(&id, &validator(&headers)?, &body.notation)?).into_response())
}

async fn report(State(store): State<Shared>) -> Response {
    Json(store.report()).into_response()
}

/// The validator-facing API. Responses carry descriptions and attempt feedback only.
pub fn router(store: Shared) -> Router {
    Router::new()
        .route("/tasks", get(list))
        .route("/tasks/{id}/claim", post(claim))
        .route("/tasks/{id}/view", get(view))
        .route("/tasks/{id}/attempts", post(attempt))
        .route("/report", get(report))
        .with_state(store)
}

pub async fn serve(store: Shared, addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(store)).await
}
