//! HTTP+JSON front end.
//!
//! | method | path                 | body                                              | reply                 |
//! |--------|----------------------|---------------------------------------------------|-----------------------|
//! | POST   | `/users`             | `{user_id?, contact_number, location, age}`       | 201 `{user_id}`       |
//! | POST   | `/meetups`           | `{user_a, user_b, contact_time_s, signal_dbm}`    | `{ok, alert}`         |
//! | POST   | `/symptoms`          | `{user_id, flag}` with flag 0 or 1                | `{ok}`                |
//! | POST   | `/cycles`            |                                                   | cycle summary         |
//! | GET    | `/reports/{user_id}` |                                                   | report                |
//! | GET    | `/stats/daily`       |                                                   | `{new_infections, cumulative}` |
//! | POST   | `/sync`              |                                                   | `{uploaded}`          |
//!
//! Errors carry a `{error, detail}` body: 400 for malformed input, 404 for
//! unknown users, 409 for registration conflicts, 502 when the cloud sink
//! refuses a batch.

use std::future::Future;
use std::path::Path;
use std::sync::{Arc, Mutex, RwLock};
use std::time::Duration;

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path as UrlPath, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::config::ServiceConfig;
use crate::error::ServiceError;
use crate::sink::CloudSink;
use crate::store::{Clock, CycleSummary, DailyStats, FogStore, Meetup, MeetupAck, NewUser};

#[derive(Clone)]
pub struct AppState {
    pub store: Arc<RwLock<FogStore>>,
    pub sink: Arc<Mutex<Box<dyn CloudSink>>>,
}

impl AppState {
    pub fn new(store: FogStore, sink: Box<dyn CloudSink>) -> Self {
        AppState {
            store: Arc::new(RwLock::new(store)),
            sink: Arc::new(Mutex::new(sink)),
        }
    }
}

pub struct ApiError(ServiceError);

impl From<ServiceError> for ApiError {
    fn from(e: ServiceError) -> Self {
        ApiError(e)
    }
}

impl From<JsonRejection> for ApiError {
    fn from(e: JsonRejection) -> Self {
        ApiError(ServiceError::Invalid(e.body_text()))
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = match &self.0 {
            ServiceError::NotFound(_) => StatusCode::NOT_FOUND,
            ServiceError::Invalid(_) => StatusCode::BAD_REQUEST,
            ServiceError::Conflict(_) => StatusCode::CONFLICT,
            ServiceError::Sink(_) => StatusCode::BAD_GATEWAY,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        let body = json!({ "error": self.0.kind(), "detail": self.0.to_string() });
        (status, Json(body)).into_response()
    }
}

fn poisoned() -> ApiError {
    ApiError(ServiceError::Io(std::io::Error::other(
        "store lock poisoned",
    )))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SymptomRequest {
    pub user_id: String,
    pub flag: i64,
}

async fn register(
    State(app): State<AppState>,
    body: Result<Json<NewUser>, JsonRejection>,
) -> Result<(StatusCode, Json<serde_json::Value>), ApiError> {
    let Json(request) = body?;
    let user_id = app
        .store
        .write()
        .map_err(|_| poisoned())?
        .register_user(request)?;
    Ok((StatusCode::CREATED, Json(json!({ "user_id": user_id }))))
}

async fn meetup(
    State(app): State<AppState>,
    body: Result<Json<Meetup>, JsonRejection>,
) -> Result<Json<MeetupAck>, ApiError> {
    let Json(meetup) = body?;
    let ack = app
        .store
        .write()
        .map_err(|_| poisoned())?
        .ingest_meetup(meetup)?;
    Ok(Json(ack))
}

async fn symptom(
    State(app): State<AppState>,
    body: Result<Json<SymptomRequest>, JsonRejection>,
) -> Result<Json<serde_json::Value>, ApiError> {
    let Json(req) = body?;
    app.store
        .write()
        .map_err(|_| poisoned())?
        .ingest_symptom(&req.user_id, req.flag)?;
    Ok(Json(json!({ "ok": true })))
}

async fn cycle(State(app): State<AppState>) -> Result<Json<CycleSummary>, ApiError> {
    let summary = app.store.write().map_err(|_| poisoned())?.compute_cycle()?;
    Ok(Json(summary))
}

async fn report(
    State(app): State<AppState>,
    UrlPath(user_id): UrlPath<String>,
) -> Result<Json<fogtrace_core::Report>, ApiError> {
    let report = app
        .store
        .read()
        .map_err(|_| poisoned())?
        .get_report(&user_id)?;
    Ok(Json(report))
}

async fn daily(State(app): State<AppState>) -> Result<Json<DailyStats>, ApiError> {
    Ok(Json(
        app.store.read().map_err(|_| poisoned())?.daily_stats(),
    ))
}

async fn sync(State(app): State<AppState>) -> Result<Json<serde_json::Value>, ApiError> {
    let uploaded = tokio::task::spawn_blocking(move || -> Result<usize, ApiError> {
        let mut sink = app.sink.lock().map_err(|_| poisoned())?;
        let mut store = app.store.write().map_err(|_| poisoned())?;
        Ok(store.sync_cloud(sink.as_mut())?)
    })
    .await
    .map_err(|e| ApiError(ServiceError::Io(std::io::Error::other(e))))??;
    Ok(Json(json!({ "uploaded": uploaded })))
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/users", post(register))
        .route("/meetups", post(meetup))
        .route("/symptoms", post(symptom))
        .route("/cycles", post(cycle))
        .route("/reports/{user_id}", get(report))
        .route("/stats/daily", get(daily))
        .route("/sync", post(sync))
        .with_state(state)
}

/// Builds the store for `config`, restoring `snapshot_path` when it exists.
pub fn open_store(config: &ServiceConfig, clock: Arc<dyn Clock>) -> Result<FogStore, ServiceError> {
    let settings = config.store_settings()?;
    match &config.snapshot_path {
        Some(path) if path.exists() => {
            let mut store = FogStore::restore(path, clock)?;
            if store.settings() != &settings {
                log::info!("snapshot settings differ from configuration; using configuration");
                store.set_settings(settings)?;
            }
            log::info!(
                "restored {} users from {}",
                store.user_count(),
                path.display()
            );
            Ok(store)
        }
        _ => FogStore::new(settings, clock),
    }
}

fn spawn_cycle_timer(state: AppState, every: Duration) -> tokio::task::JoinHandle<()> {
    tokio::spawn(async move {
        let mut ticker = tokio::time::interval(every);
        ticker.tick().await;
        loop {
            ticker.tick().await;
            let result = state.store.write().map(|mut s| s.compute_cycle());
            match result {
                Ok(Ok(summary)) => log::debug!("timed cycle {summary:?}"),
                Ok(Err(e)) => log::error!("timed cycle failed: {e}"),
                Err(_) => {
                    log::error!("store lock poisoned; stopping cycle timer");
                    return;
                }
            }
        }
    })
}

/// Serves `state` on `listener` until `shutdown` resolves, then writes a
/// snapshot to `snapshot_path` if one is given.
pub async fn serve<F>(
    listener: tokio::net::TcpListener,
    state: AppState,
    cycle_interval: Option<Duration>,
    snapshot_path: Option<&Path>,
    shutdown: F,
) -> Result<(), ServiceError>
where
    F: Future<Output = ()> + Send + 'static,
{
    let timer = cycle_interval
        .filter(|d| !d.is_zero())
        .map(|d| spawn_cycle_timer(state.clone(), d));
    let app = router(state.clone());
    axum::serve(listener, app)
        .with_graceful_shutdown(shutdown)
        .await?;
    if let Some(t) = timer {
        t.abort();
    }
    if let Some(path) = snapshot_path {
        let store = state
            .store
            .read()
            .map_err(|_| ServiceError::Io(std::io::Error::other("store lock poisoned")))?;
        store.snapshot(path)?;
        log::info!("snapshot written to {}", path.display());
    }
    Ok(())
}

/// Opens the store and sink described by `config` and serves until `shutdown`.
pub async fn run_service<F>(
    config: &ServiceConfig,
    listener: tokio::net::TcpListener,
    clock: Arc<dyn Clock>,
    shutdown: F,
) -> Result<(), ServiceError>
where
    F: Future<Output = ()> + Send + 'static,
{
    let store = open_store(config, clock)?;
    let sink = config.sink.build()?;
    let interval = Duration::from_secs(config.cycle_interval_s);
    serve(
        listener,
        AppState::new(store, sink),
        Some(interval),
        config.snapshot_path.as_deref(),
        shutdown,
    )
    .await
}
