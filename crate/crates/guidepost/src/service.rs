//! HTTP/JSON facade over the registry and the engine.
//!
//! Datasets load lazily from the registry and stay cached. A dataset
//! without a stored bundle gets one built in the background; until then
//! approximate queries answer 409 while exact queries are served.

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::{Arc, RwLock};

use axum::body::Bytes;
use axum::extract::rejection::{BytesRejection, JsonRejection, QueryRejection};
use axum::extract::{DefaultBodyLimit, FromRequest, Multipart, Path, Query, Request, State};
use axum::http::{header, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use guidepost_core::{ColumnMeta, Dataset, DatasetId, EngineConfig, EngineError, Explorer, SessionState, SketchBundle, SketchConfig};
use serde::{Deserialize, Serialize};

use crate::build::build_bundle_parallel;
use crate::ingest::IngestOptions;
use crate::params::{self, OverviewParams, RankParams, RelatedParams, RowParams};
use crate::registry::Registry;
use crate::render::to_json;
use crate::{Error, DEFAULT_MAX_UPLOAD_BYTES};

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub registry: PathBuf,
    pub max_upload_bytes: usize,
    pub sketch: SketchConfig,
    pub engine: EngineConfig,
    /// Build missing bundles in the background. When off, datasets without
    /// a stored bundle serve exact queries only.
    pub build_bundles: bool,
}

impl ServiceConfig {
    pub fn new(registry: impl Into<PathBuf>) -> Self {
        Self {
            registry: registry.into(),
            max_upload_bytes: DEFAULT_MAX_UPLOAD_BYTES,
            sketch: SketchConfig::default(),
            engine: EngineConfig::default(),
            build_bundles: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BundleStatus {
    Building,
    Ready,
    Failed,
}

#[derive(Debug, Clone)]
enum BundleSlot {
    Building,
    Ready(Arc<SketchBundle>),
    Failed(String),
}

#[derive(Debug)]
struct Entry {
    dataset: Dataset,
    bundle: RwLock<BundleSlot>,
}

impl Entry {
    fn status(&self) -> BundleStatus {
        match &*self.bundle.read().expect("bundle lock") {
            BundleSlot::Building => BundleStatus::Building,
            BundleSlot::Ready(_) => BundleStatus::Ready,
            BundleSlot::Failed(_) => BundleStatus::Failed,
        }
    }
}

/// Shared service state: the registry and the loaded datasets.
#[derive(Debug)]
pub struct AppState {
    registry: Registry,
    config: ServiceConfig,
    datasets: RwLock<HashMap<String, Arc<Entry>>>,
    sessions: tokio::sync::Mutex<()>,
}

impl AppState {
    pub fn new(config: ServiceConfig) -> Result<Arc<Self>, Error> {
        let registry = Registry::open(&config.registry)?;
        Ok(Arc::new(Self { registry, config, datasets: RwLock::new(HashMap::new()), sessions: Default::default() }))
    }

    pub fn registry(&self) -> &Registry {
        &self.registry
    }

    /// Bundle state of a loaded dataset; `None` if it is not loaded.
    pub fn bundle_status(&self, id: &str) -> Option<BundleStatus> {
        self.datasets.read().expect("registry lock").get(id).map(|e| e.status())
    }

    /// Waits until the dataset's bundle is no longer building.
    pub async fn wait_for_bundle(&self, id: &str) -> Option<BundleStatus> {
        loop {
            match self.bundle_status(id) {
                Some(BundleStatus::Building) => tokio::time::sleep(std::time::Duration::from_millis(20)).await,
                other => return other,
            }
        }
    }

    fn cached(&self, id: &str) -> Option<Arc<Entry>> {
        self.datasets.read().expect("registry lock").get(id).cloned()
    }

    /// Registers a parsed dataset, loading a stored bundle or scheduling a
    /// build. Returns the cached entry if one already exists.
    fn install(self: &Arc<Self>, dataset: Dataset) -> Result<Arc<Entry>, Error> {
        let id = dataset.id().as_str().to_owned();
        let stored = self.registry.load_bundle(&id)?.filter(|b| b.matches(&dataset));
        let mut map = self.datasets.write().expect("registry lock");
        if let Some(e) = map.get(&id) {
            return Ok(e.clone());
        }
        let slot = match stored {
            Some(b) => BundleSlot::Ready(Arc::new(b)),
            None => BundleSlot::Building,
        };
        let building = matches!(slot, BundleSlot::Building);
        let entry = Arc::new(Entry { dataset, bundle: RwLock::new(slot) });
        map.insert(id.clone(), entry.clone());
        drop(map);
        if building && self.config.build_bundles {
            self.spawn_build(entry.clone());
        }
        Ok(entry)
    }

    fn spawn_build(self: &Arc<Self>, entry: Arc<Entry>) {
        let state = self.clone();
        tokio::task::spawn_blocking(move || {
            let id = entry.dataset.id().clone();
            let started = std::time::Instant::now();
            let result = build_bundle_parallel(&entry.dataset, &state.config.sketch)
                .and_then(|b| state.registry.save_bundle(&b).map(|size| (b, size)));
            let slot = match result {
                Ok((bundle, size)) => {
                    tracing::info!(dataset = %id, bytes = size, elapsed = ?started.elapsed(), "bundle ready");
                    BundleSlot::Ready(Arc::new(bundle))
                }
                Err(e) => {
                    tracing::error!(dataset = %id, error = %e, "bundle build failed");
                    BundleSlot::Failed(e.to_string())
                }
            };
            *entry.bundle.write().expect("bundle lock") = slot;
        });
    }

    async fn entry(self: &Arc<Self>, id: &str) -> Result<Arc<Entry>, ApiError> {
        if let Some(e) = self.cached(id) {
            return Ok(e);
        }
        let state = self.clone();
        let owned = id.to_owned();
        let dataset = blocking(move || state.registry.load_dataset(&owned)).await?;
        Ok(self.install(dataset)?)
    }
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> Result<T, Error> + Send + 'static) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::internal(format!("worker failed: {e}")))?
        .map_err(ApiError::from)
}

/// Runs `f` against an explorer over the entry's dataset and bundle.
async fn explore<T: Serialize + Send + 'static>(
    state: &Arc<AppState>,
    entry: Arc<Entry>,
    f: impl FnOnce(&Explorer<'_>) -> Result<T, Error> + Send + 'static,
) -> Result<Response, ApiError> {
    let engine = state.config.engine;
    let slot = entry.bundle.read().expect("bundle lock").clone();
    if let BundleSlot::Failed(reason) = &slot {
        tracing::warn!(reason, "serving without a bundle");
    }
    let value = blocking(move || {
        let bundle = match &slot {
            BundleSlot::Ready(b) => Some(b.as_ref()),
            _ => None,
        };
        f(&Explorer::new(&entry.dataset).with_bundle(bundle).with_config(engine))
    })
    .await?;
    Ok(json(StatusCode::OK, &value))
}

pub fn json<T: Serialize + ?Sized>(status: StatusCode, value: &T) -> Response {
    let mut r = (status, to_json(value)).into_response();
    r.headers_mut().insert(header::CONTENT_TYPE, HeaderValue::from_static("application/json"));
    r
}

/// An error as the client sees it: HTTP status, stable code, message.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApiError {
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    error: ErrorDetail<'a>,
}

#[derive(Serialize)]
struct ErrorDetail<'a> {
    code: &'a str,
    message: &'a str,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        Self { status, code, message: message.into() }
    }

    fn internal(message: impl Into<String>) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", message)
    }

    fn bad_query(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "invalid_query", message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        if self.status.is_server_error() {
            tracing::error!(code = self.code, message = %self.message);
        }
        json(self.status, &ErrorBody { error: ErrorDetail { code: self.code, message: &self.message } })
    }
}

impl From<EngineError> for ApiError {
    fn from(e: EngineError) -> Self {
        let (status, code) = match &e {
            EngineError::InvalidFilterRange => (StatusCode::BAD_REQUEST, "invalid_filter_range"),
            EngineError::InvalidQuery(_) => (StatusCode::BAD_REQUEST, "invalid_query"),
            EngineError::UnknownGuidepost(_) => (StatusCode::NOT_FOUND, "unknown_guidepost"),
            EngineError::BundleNotReady => (StatusCode::CONFLICT, "bundle_building"),
            EngineError::StaleBundle => (StatusCode::CONFLICT, "stale_bundle"),
            EngineError::FocusNotAdmissible(_) => (StatusCode::UNPROCESSABLE_ENTITY, "focus_not_admissible"),
            EngineError::OverviewTooLarge { .. } => (StatusCode::BAD_REQUEST, "overview_too_large"),
            EngineError::SessionDataset(_) => (StatusCode::BAD_REQUEST, "session_dataset"),
            EngineError::SessionVersion(_) => (StatusCode::BAD_REQUEST, "session_version"),
        };
        ApiError::new(status, code, e.to_string())
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let message = e.to_string();
        match e {
            Error::Engine(e) => e.into(),
            Error::Table(guidepost_core::TableError::InvalidColumn(_) | guidepost_core::TableError::MalformedPredicate(_)) => {
                ApiError::bad_query(message)
            }
            Error::Table(_) | Error::Unreadable(_) => ApiError::new(StatusCode::BAD_REQUEST, "invalid_dataset", message),
            Error::UnknownDataset(_) => ApiError::new(StatusCode::NOT_FOUND, "unknown_dataset", message),
            Error::UnknownSession(_) => ApiError::new(StatusCode::NOT_FOUND, "unknown_session", message),
            Error::CorruptSession(_) => ApiError::new(StatusCode::BAD_REQUEST, "invalid_session", message),
            Error::TooLarge { .. } => ApiError::new(StatusCode::PAYLOAD_TOO_LARGE, "dataset_too_large", message),
            Error::NoBundle(_) => ApiError::new(StatusCode::CONFLICT, "bundle_building", message),
            Error::Config(_) | Error::Format(_) | Error::Corrupt(_) | Error::Io(_) | Error::Json(_) => {
                ApiError::internal(message)
            }
        }
    }
}

fn query_rejection(r: QueryRejection) -> ApiError {
    ApiError::bad_query(r.body_text())
}

fn body_rejection(status: StatusCode, text: String, cap: usize) -> ApiError {
    if status == StatusCode::PAYLOAD_TOO_LARGE {
        Error::TooLarge { cap }.into()
    } else {
        ApiError::new(status, "invalid_body", text)
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    let cap = state.config.max_upload_bytes;
    Router::new()
        .route("/datasets", post(create_dataset))
        .route("/datasets/{id}/columns", get(columns))
        .route("/datasets/{id}/guideposts", get(guideposts))
        .route("/datasets/{id}/guideposts/{gid}/related", get(related))
        .route("/datasets/{id}/overview", get(overview))
        .route("/datasets/{id}/rows", get(rows))
        .route("/sessions", post(create_session))
        .route("/sessions/{sid}", get(read_session).put(write_session))
        .fallback(|| async { ApiError::new(StatusCode::NOT_FOUND, "not_found", "no such endpoint") })
        .layer(DefaultBodyLimit::max(cap))
        .with_state(state)
}

pub async fn serve(config: ServiceConfig, addr: std::net::SocketAddr) -> anyhow::Result<()> {
    let state = AppState::new(config)?;
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!(addr = %listener.local_addr()?, registry = %state.registry.root().display(), "listening");
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct IngestParams {
    /// Single character, or `tab`.
    delimiter: Option<String>,
    header: Option<bool>,
}

impl IngestParams {
    fn options(&self) -> Result<IngestOptions, ApiError> {
        let mut o = IngestOptions::default();
        if let Some(d) = self.delimiter.as_deref() {
            o.delimiter = match d {
                "tab" | "\t" => b'\t',
                d if d.len() == 1 => d.as_bytes()[0],
                _ => return Err(ApiError::bad_query("delimiter must be a single byte or `tab`")),
            };
        }
        if let Some(h) = self.header {
            o.header = h;
        }
        Ok(o)
    }
}

#[derive(Serialize)]
struct Created<'a> {
    id: &'a DatasetId,
    n: usize,
    d: usize,
    columns: Vec<ColumnMeta>,
    bundle: BundleStatus,
}

async fn create_dataset(
    State(state): State<Arc<AppState>>,
    params: Result<Query<IngestParams>, QueryRejection>,
    request: Request,
) -> Result<Response, ApiError> {
    let options = params.map_err(query_rejection)?.options()?;
    let cap = state.config.max_upload_bytes;
    let multipart = request
        .headers()
        .get(header::CONTENT_TYPE)
        .and_then(|v| v.to_str().ok())
        .is_some_and(|v| v.starts_with("multipart/form-data"));
    let bytes = if multipart {
        let mut form = Multipart::from_request(request, &state)
            .await
            .map_err(|r| body_rejection(r.status(), r.body_text(), cap))?;
        let mut file = None;
        while let Some(field) = form.next_field().await.map_err(|e| body_rejection(e.status(), e.body_text(), cap))? {
            if file.is_none() {
                file = Some(field.bytes().await.map_err(|e| body_rejection(e.status(), e.body_text(), cap))?);
            }
        }
        file.ok_or_else(|| ApiError::new(StatusCode::BAD_REQUEST, "invalid_body", "multipart body has no file field"))?
    } else {
        Bytes::from_request(request, &state)
            .await
            .map_err(|r: BytesRejection| body_rejection(r.status(), r.body_text(), cap))?
    };
    if bytes.len() > cap {
        return Err(Error::TooLarge { cap }.into());
    }
    let st = state.clone();
    let (dataset, meta) = blocking(move || st.registry.ingest(&bytes, options)).await?;
    let entry = state.install(dataset)?;
    let body = Created { id: &meta.id, n: meta.n, d: meta.d, columns: meta.columns.clone(), bundle: entry.status() };
    Ok(json(StatusCode::CREATED, &body))
}

async fn columns(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let entry = state.entry(&id).await?;
    Ok(json(StatusCode::OK, &entry.dataset.metas()))
}

async fn guideposts(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    params: Result<Query<RankParams>, QueryRejection>,
) -> Result<Response, ApiError> {
    let Query(params) = params.map_err(query_rejection)?;
    params.query()?;
    let entry = state.entry(&id).await?;
    explore(&state, entry, move |ex| params::rank(ex, &params)).await
}

async fn related(
    State(state): State<Arc<AppState>>,
    Path((id, gid)): Path<(String, String)>,
    params: Result<Query<RelatedParams>, QueryRejection>,
) -> Result<Response, ApiError> {
    let Query(params) = params.map_err(query_rejection)?;
    params.settings()?;
    let entry = state.entry(&id).await?;
    explore(&state, entry, move |ex| params::related(ex, &gid, &params)).await
}

async fn overview(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    params: Result<Query<OverviewParams>, QueryRejection>,
) -> Result<Response, ApiError> {
    let Query(params) = params.map_err(query_rejection)?;
    params.parsed()?;
    let entry = state.entry(&id).await?;
    explore(&state, entry, move |ex| params::overview(ex, &params)).await
}

async fn rows(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    params: Result<Query<RowParams>, QueryRejection>,
) -> Result<Response, ApiError> {
    let Query(params) = params.map_err(query_rejection)?;
    params.query()?;
    let entry = state.entry(&id).await?;
    explore(&state, entry, move |ex| params::rows(ex.dataset(), &params)).await
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct NewSession {
    dataset: DatasetId,
}

#[derive(Serialize)]
struct CreatedSession<'a> {
    id: &'a str,
    session: &'a SessionState,
}

fn json_rejection(r: JsonRejection) -> ApiError {
    ApiError::new(StatusCode::BAD_REQUEST, "invalid_session", r.body_text())
}

async fn create_session(
    State(state): State<Arc<AppState>>,
    body: Result<Json<NewSession>, JsonRejection>,
) -> Result<Response, ApiError> {
    let Json(body) = body.map_err(json_rejection)?;
    state.entry(body.dataset.as_str()).await?;
    let session = SessionState::new(body.dataset);
    let sid = uuid::Uuid::new_v4().simple().to_string();
    let _guard = state.sessions.lock().await;
    state.registry.save_session(&sid, &session)?;
    Ok(json(StatusCode::CREATED, &CreatedSession { id: &sid, session: &session }))
}

async fn read_session(State(state): State<Arc<AppState>>, Path(sid): Path<String>) -> Result<Response, ApiError> {
    Ok(json(StatusCode::OK, &state.registry.load_session(&sid)?))
}

/// Replaces a session after checking it against its dataset.
async fn write_session(
    State(state): State<Arc<AppState>>,
    Path(sid): Path<String>,
    body: Result<Json<SessionState>, JsonRejection>,
) -> Result<Response, ApiError> {
    let Json(session) = body.map_err(json_rejection)?;
    let _guard = state.sessions.lock().await;
    let stored = state.registry.load_session(&sid)?;
    if stored.dataset != session.dataset {
        return Err(EngineError::SessionDataset(session.dataset.to_string()).into());
    }
    let entry = state.entry(session.dataset.as_str()).await?;
    session.validate(&Explorer::new(&entry.dataset))?;
    state.registry.save_session(&sid, &session)?;
    Ok(json(StatusCode::OK, &session))
}
