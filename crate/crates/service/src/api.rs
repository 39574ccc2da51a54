//! JSON-over-HTTP routes. Field names are documented in `api-schema.json`.

use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::routing::{get, post};
use axum::{Json, Router};
use prefgp::acquisition::QueryChoice;
use serde::{Deserialize, Serialize};

use crate::error::ServiceError;
use crate::session::{Choice, HistoryEntry, Session, SessionConfig, Status, Surface};
use crate::store::SessionStore;

pub fn router(store: Arc<SessionStore>) -> Router {
    Router::new()
        .route("/healthz", get(healthz))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/query", get(get_query))
        .route("/sessions/{id}/response", post(post_response))
        .route("/sessions/{id}/surface", get(get_surface))
        .fallback(|| async { ServiceError::NotFound("no such route".into()) })
        .with_state(store)
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Candidate {
    pub index: usize,
    /// Raw trajectory parameters, e.g. minigolf (angle rad, speed m/s).
    pub params: Vec<f64>,
    /// Normalized features the model sees.
    pub features: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct QueryPayload {
    pub session_id: String,
    pub status: String,
    pub asked: usize,
    pub budget: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first: Option<Candidate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub second: Option<Candidate>,
    /// Expected information gain of the query, bits.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub objective: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SessionPayload {
    pub id: String,
    pub status: Status,
    pub config: SessionConfig,
    pub asked: usize,
    pub budget: usize,
    pub param_names: Vec<String>,
    pub feature_names: Vec<String>,
    pub history: Vec<HistoryEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ResponseAck {
    pub session_id: String,
    pub asked: usize,
    pub budget: usize,
    pub complete: bool,
}

#[derive(Debug, Deserialize)]
pub struct ResponseBody {
    pub choice: String,
}

#[derive(Debug, Deserialize)]
pub struct SurfaceParams {
    pub grid: Option<usize>,
}

const DEFAULT_GRID: usize = 25;
const MAX_GRID: usize = 201;

fn candidate(session: &Session, index: usize) -> Candidate {
    let t = &session.pool().trajectories()[index];
    Candidate { index, params: t.params.clone(), features: t.features.as_slice().to_vec() }
}

pub fn query_payload(session: &Session, choice: Option<QueryChoice>) -> QueryPayload {
    let status = if choice.is_some() { "pending" } else { "complete" };
    QueryPayload {
        session_id: session.id().to_string(),
        status: status.to_string(),
        asked: session.asked(),
        budget: session.config().budget,
        first: choice.map(|c| candidate(session, c.i)),
        second: choice.map(|c| candidate(session, c.j)),
        objective: choice.map(|c| c.objective),
    }
}

pub fn session_payload(session: &Session) -> SessionPayload {
    let env = session.pool().environment();
    SessionPayload {
        id: session.id().to_string(),
        status: session.status(),
        config: session.config().clone(),
        asked: session.asked(),
        budget: session.config().budget,
        param_names: env.param_names().iter().map(|s| s.to_string()).collect(),
        feature_names: env.feature_names().iter().map(|s| s.to_string()).collect(),
        history: session.history().to_vec(),
    }
}

fn now_ms() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_millis() as u64)
}

/// Model work is CPU-bound; keep it off the async workers.
async fn blocking<T: Send + 'static>(f: impl FnOnce() -> Result<T, ServiceError> + Send + 'static) -> Result<T, ServiceError> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ServiceError::Io(std::io::Error::other(format!("worker panicked: {e}"))))?
}

async fn healthz() -> Json<serde_json::Value> {
    Json(serde_json::json!({ "status": "ok" }))
}

async fn create_session(
    State(store): State<Arc<SessionStore>>,
    body: Option<Json<serde_json::Value>>,
) -> Result<(StatusCode, Json<SessionPayload>), ServiceError> {
    let config: SessionConfig = match body {
        Some(Json(v)) => serde_json::from_value(v).map_err(|e| ServiceError::InvalidConfig(e.to_string()))?,
        None => SessionConfig::default(),
    };
    let payload = blocking(move || {
        let handle = store.create(config)?;
        let session = store.lock(&handle);
        Ok(session_payload(&session))
    })
    .await?;
    Ok((StatusCode::CREATED, Json(payload)))
}

async fn get_session(
    State(store): State<Arc<SessionStore>>,
    Path(id): Path<String>,
) -> Result<Json<SessionPayload>, ServiceError> {
    let handle = store.get(&id)?;
    blocking(move || Ok(Json(session_payload(&store.lock(&handle))))).await
}

async fn get_query(
    State(store): State<Arc<SessionStore>>,
    Path(id): Path<String>,
) -> Result<Json<QueryPayload>, ServiceError> {
    let handle = store.get(&id)?;
    blocking(move || {
        let mut session = store.lock(&handle);
        let choice = session.next_query()?;
        Ok(Json(query_payload(&session, choice)))
    })
    .await
}

async fn post_response(
    State(store): State<Arc<SessionStore>>,
    Path(id): Path<String>,
    body: Result<Json<ResponseBody>, JsonRejection>,
) -> Result<Json<ResponseAck>, ServiceError> {
    let Json(body) = body.map_err(|e| ServiceError::BadRequest(e.body_text()))?;
    let choice = match body.choice.as_str() {
        "first" => Choice::First,
        "second" => Choice::Second,
        other => return Err(ServiceError::BadRequest(format!("choice must be \"first\" or \"second\", got {other:?}"))),
    };
    let handle = store.get(&id)?;
    blocking(move || {
        let mut session = store.try_lock(&handle)?;
        store.answer(&mut session, choice, now_ms())?;
        Ok(Json(ResponseAck {
            session_id: session.id().to_string(),
            asked: session.asked(),
            budget: session.config().budget,
            complete: session.is_complete(),
        }))
    })
    .await
}

async fn get_surface(
    State(store): State<Arc<SessionStore>>,
    Path(id): Path<String>,
    params: Result<Query<SurfaceParams>, QueryRejection>,
) -> Result<Json<Surface>, ServiceError> {
    let Query(params) = params.map_err(|e| ServiceError::BadRequest(e.body_text()))?;
    let grid = params.grid.unwrap_or(DEFAULT_GRID);
    if grid > MAX_GRID {
        return Err(ServiceError::BadRequest(format!("grid may be at most {MAX_GRID}, got {grid}")));
    }
    let handle = store.get(&id)?;
    blocking(move || {
        let session = store.lock(&handle);
        Ok(Json(session.surface(grid)?))
    })
    .await
}
