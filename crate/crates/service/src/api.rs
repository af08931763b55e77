//! HTTP interface under `/v1`. Bodies are JSON except the flat cluster
//! export, which is plain text.

use std::sync::Arc;
use std::time::Duration;

use axum::extract::{Path, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post, put};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::engine::{Engine, EngineError, NewSubmission, SnapshotSummary};

pub struct ApiError(EngineError);

impl From<EngineError> for ApiError {
    fn from(e: EngineError) -> Self {
        ApiError(e)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = match &self.0 {
            EngineError::UnknownProblem(_) => StatusCode::NOT_FOUND,
            EngineError::Inactive(_) | EngineError::TooFewAttempts { .. } => StatusCode::FORBIDDEN,
            EngineError::NoSnapshot(_) | EngineError::NoSubmissions(_) | EngineError::Duplicate(_) => {
                StatusCode::CONFLICT
            }
            EngineError::InvalidId(_) => StatusCode::BAD_REQUEST,
            EngineError::Store(_) | EngineError::Cluster(_) | EngineError::Pool(_) => {
                tracing::error!("{}", self.0);
                StatusCode::INTERNAL_SERVER_ERROR
            }
        };
        (status, Json(json!({ "error": self.0.to_string() }))).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

#[derive(Clone)]
struct AppState {
    engine: Engine,
    token: Option<Arc<str>>,
}

impl AppState {
    fn instructor(&self, headers: &HeaderMap) -> Result<(), Response> {
        let Some(token) = &self.token else { return Ok(()) };
        let given = headers
            .get(header::AUTHORIZATION)
            .and_then(|v| v.to_str().ok())
            .and_then(|v| v.strip_prefix("Bearer "));
        if given == Some(&**token) {
            Ok(())
        } else {
            Err((StatusCode::UNAUTHORIZED, Json(json!({ "error": "instructor token required" }))).into_response())
        }
    }
}

/// Runs blocking engine work off the async executor.
async fn blocking<T: Send + 'static>(f: impl FnOnce() -> Result<T, EngineError> + Send + 'static) -> ApiResult<T> {
    match tokio::task::spawn_blocking(f).await {
        Ok(r) => r.map_err(ApiError),
        Err(e) => Err(ApiError(EngineError::Pool(e.to_string()))),
    }
}

#[derive(Debug, Deserialize)]
struct SubmissionBody {
    id: Option<String>,
    author: String,
    source: String,
    correct: bool,
    marks: Option<f64>,
}

async fn submit(State(app): State<AppState>, Path(pid): Path<String>, Json(body): Json<SubmissionBody>) -> ApiResult<Response> {
    let e = app.engine.clone();
    let new = NewSubmission { id: body.id, author: body.author, source: body.source, correct: body.correct, marks: body.marks };
    let receipt = blocking(move || e.ingest(&pid, new)).await?;
    Ok((StatusCode::CREATED, Json(receipt)).into_response())
}

#[derive(Debug, Deserialize)]
struct CorrectionBody {
    source: String,
    author: Option<String>,
}

async fn corrections(State(app): State<AppState>, Path(pid): Path<String>, Json(body): Json<CorrectionBody>) -> ApiResult<Response> {
    let e = app.engine.clone();
    let c = blocking(move || e.corrections(&pid, &body.source, body.author.as_deref())).await?;
    Ok(Json(c).into_response())
}

async fn recluster(State(app): State<AppState>, Path(pid): Path<String>, headers: HeaderMap) -> ApiResult<Response> {
    if let Err(r) = app.instructor(&headers) {
        return Ok(r);
    }
    let e = app.engine.clone();
    let s = blocking(move || e.recluster(&pid)).await?;
    Ok(Json(SnapshotSummary::of(&s)).into_response())
}

async fn clusters(State(app): State<AppState>, Path(pid): Path<String>, headers: HeaderMap) -> ApiResult<Response> {
    if let Err(r) = app.instructor(&headers) {
        return Ok(r);
    }
    let text = app.engine.export_clusters(&pid)?;
    Ok(([(header::CONTENT_TYPE, "text/plain; charset=utf-8")], text).into_response())
}

fn json_text(body: String) -> Response {
    ([(header::CONTENT_TYPE, "application/json")], body).into_response()
}

async fn dendrogram(State(app): State<AppState>, Path(pid): Path<String>, headers: HeaderMap) -> ApiResult<Response> {
    if let Err(r) = app.instructor(&headers) {
        return Ok(r);
    }
    Ok(json_text(app.engine.export_dendrogram(&pid)?))
}

async fn forcegraph(State(app): State<AppState>, Path(pid): Path<String>, headers: HeaderMap) -> ApiResult<Response> {
    if let Err(r) = app.instructor(&headers) {
        return Ok(r);
    }
    let e = app.engine.clone();
    Ok(json_text(blocking(move || e.export_forcegraph(&pid)).await?))
}

async fn variance(State(app): State<AppState>, Path(pid): Path<String>, headers: HeaderMap) -> ApiResult<Response> {
    if let Err(r) = app.instructor(&headers) {
        return Ok(r);
    }
    let e = app.engine.clone();
    let report = blocking(move || e.evaluate_variance(&pid)).await?;
    Ok(Json(report).into_response())
}

#[derive(Debug, Serialize, Deserialize)]
struct Activation {
    active: bool,
}

async fn activation(
    State(app): State<AppState>,
    Path(pid): Path<String>,
    headers: HeaderMap,
    Json(body): Json<Activation>,
) -> ApiResult<Response> {
    if let Err(r) = app.instructor(&headers) {
        return Ok(r);
    }
    let e = app.engine.clone();
    let p = pid.clone();
    blocking(move || e.set_active(&p, body.active)).await?;
    Ok(Json(json!({ "problem_id": pid, "active": body.active })).into_response())
}

async fn health() -> &'static str {
    "ok"
}

pub fn router(engine: Engine) -> Router {
    let token = engine.config().instructor_token.as_deref().map(Arc::from);
    Router::new()
        .route("/v1/health", get(health))
        .route("/v1/problems/{pid}/submissions", post(submit))
        .route("/v1/problems/{pid}/corrections", post(corrections))
        .route("/v1/problems/{pid}/recluster", post(recluster))
        .route("/v1/problems/{pid}/clusters", get(clusters))
        .route("/v1/problems/{pid}/dendrogram", get(dendrogram))
        .route("/v1/problems/{pid}/forcegraph", get(forcegraph))
        .route("/v1/problems/{pid}/variance", get(variance))
        .route("/v1/problems/{pid}/activation", put(activation))
        .with_state(AppState { engine, token })
}

/// Reclusters problems with new matrix members every `period`.
pub fn spawn_scheduler(engine: Engine, period: Duration) -> tokio::task::JoinHandle<()> {
    tokio::spawn(async move {
        let mut ticks = tokio::time::interval(period);
        ticks.set_missed_tick_behavior(tokio::time::MissedTickBehavior::Delay);
        // The first tick completes immediately.
        ticks.tick().await;
        loop {
            ticks.tick().await;
            let e = engine.clone();
            match tokio::task::spawn_blocking(move || e.recluster_dirty()).await {
                Ok(results) => {
                    for (pid, r) in results {
                        match r {
                            Ok(s) => tracing::info!(problem = %pid, clusters = s.clusters.len(), "reclustered"),
                            Err(err) => tracing::warn!(problem = %pid, "recluster failed: {err}"),
                        }
                    }
                }
                Err(err) => tracing::error!("recluster task failed: {err}"),
            }
        }
    })
}

/// Serves the API on the configured address until interrupted.
pub async fn serve(engine: Engine) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(&engine.config().listen).await?;
    tracing::info!("listening on {}", listener.local_addr()?);
    let scheduler = spawn_scheduler(engine.clone(), Duration::from_secs(engine.config().recluster_period_secs));
    let result = axum::serve(listener, router(engine))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await;
    scheduler.abort();
    result
}
