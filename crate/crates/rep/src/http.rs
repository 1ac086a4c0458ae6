//! JSON-over-HTTP front end. Errors are `{code, message}` bodies.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use rep_core::dialogue::{Reply, UserEvent};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use tower_http::services::ServeDir;

use crate::service::{CandidateReport, Service, ServiceError, SortOrder, API_VERSION};

#[derive(Debug, Serialize, Deserialize)]
pub struct ErrorBody {
    pub code: String,
    pub message: String,
    /// The reply to show instead, for completed sessions and rejected answers.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reply: Option<Reply>,
}

pub struct ApiError {
    status: StatusCode,
    body: ErrorBody,
}

impl ApiError {
    fn bad_request(message: String) -> Self {
        ApiError { status: StatusCode::BAD_REQUEST, body: ErrorBody { code: "bad_request".into(), message, reply: None } }
    }
}

pub fn status_of(e: &ServiceError) -> StatusCode {
    match e {
        ServiceError::UnknownScript(_)
        | ServiceError::UnknownPersona(_)
        | ServiceError::SessionNotFound(_)
        | ServiceError::UnknownLink(_) => StatusCode::NOT_FOUND,
        ServiceError::SessionCompleted { .. } | ServiceError::SessionNotComplete => StatusCode::CONFLICT,
        ServiceError::SessionAbandoned => StatusCode::GONE,
        ServiceError::InvalidAnswer { .. } | ServiceError::InvalidEvent(_) | ServiceError::NoCandidate => {
            StatusCode::UNPROCESSABLE_ENTITY
        }
        ServiceError::UnknownSortKey(_) => StatusCode::BAD_REQUEST,
        ServiceError::Asset(_) | ServiceError::Storage(_) => StatusCode::INTERNAL_SERVER_ERROR,
    }
}

impl From<ServiceError> for ApiError {
    fn from(e: ServiceError) -> Self {
        let reply = match &e {
            ServiceError::SessionCompleted { reply } => Some(reply.clone()),
            ServiceError::InvalidAnswer { reask, .. } => reask.clone(),
            _ => None,
        };
        ApiError { status: status_of(&e), body: ErrorBody { code: e.code().into(), message: e.to_string(), reply } }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

fn parse<T: DeserializeOwned>(body: &Bytes) -> ApiResult<T> {
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request(e.to_string()))
}

/// Runs a service call off the async executor; the service does blocking file IO.
async fn blocking<T: Send + 'static>(
    svc: &Arc<Service>,
    f: impl FnOnce(&Service) -> Result<T, ServiceError> + Send + 'static,
) -> ApiResult<T> {
    let svc = svc.clone();
    tokio::task::spawn_blocking(move || f(&svc)).await.map_err(|e| ApiError {
        status: StatusCode::INTERNAL_SERVER_ERROR,
        body: ErrorBody { code: "internal".into(), message: e.to_string(), reply: None },
    })?
    .map_err(ApiError::from)
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateSession {
    pub script: String,
    #[serde(default)]
    pub persona: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ResultsPage {
    pub api_version: u32,
    pub sort_by: String,
    pub order: SortOrder,
    pub results: Vec<CandidateReport>,
}

async fn create_session(State(svc): State<Arc<Service>>, body: Bytes) -> ApiResult<Response> {
    let req: CreateSession = parse(&body)?;
    let resp = blocking(&svc, move |s| s.create_session(&req.script, req.persona.as_deref())).await?;
    Ok((StatusCode::CREATED, Json(resp)).into_response())
}

async fn post_message(State(svc): State<Arc<Service>>, Path(id): Path<String>, body: Bytes) -> ApiResult<Response> {
    let event: UserEvent = parse(&body)?;
    let resp = blocking(&svc, move |s| s.post_message(&id, event)).await?;
    Ok(Json(resp).into_response())
}

async fn get_report(State(svc): State<Arc<Service>>, Path(id): Path<String>) -> ApiResult<Json<CandidateReport>> {
    Ok(Json(blocking(&svc, move |s| s.get_report(&id)).await?))
}

async fn list_results(
    State(svc): State<Arc<Service>>,
    Query(q): Query<BTreeMap<String, String>>,
) -> ApiResult<Json<ResultsPage>> {
    let sort_by = q.get("sort_by").cloned().unwrap_or_else(|| "im".into());
    let order = match q.get("order").map(String::as_str) {
        None | Some("desc") => SortOrder::Desc,
        Some("asc") => SortOrder::Asc,
        Some(other) => return Err(ApiError::bad_request(format!("order is asc or desc, not `{other}`"))),
    };
    let key = sort_by.clone();
    let results = blocking(&svc, move |s| s.list_results(&key, order)).await?;
    Ok(Json(ResultsPage { api_version: API_VERSION, sort_by, order, results }))
}

async fn redirect(State(svc): State<Arc<Service>>, Path((id, link)): Path<(String, String)>) -> ApiResult<Response> {
    let url = blocking(&svc, move |s| s.track_click(&id, &link)).await?;
    Ok((StatusCode::FOUND, [(header::LOCATION, url)]).into_response())
}

async fn healthz() -> Json<serde_json::Value> {
    Json(serde_json::json!({ "status": "ok", "api_version": API_VERSION }))
}

pub fn router(svc: Arc<Service>, static_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}/messages", post(post_message))
        .route("/sessions/{id}/report", get(get_report))
        .route("/results", get(list_results))
        .route("/r/{session}/{link}", get(redirect))
        .route("/healthz", get(healthz))
        .with_state(svc);
    match static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    }
}
