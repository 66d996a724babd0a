//! HTTP API over a rubric store.
//!
//! Handlers are thin: each one parses its input, calls the matching function
//! in [`ops`] on a blocking thread and maps [`ApiError`] codes onto status
//! codes. [`PARITY`] lists which CLI command reaches the same operation.

pub mod ops;

use std::future::Future;
use std::net::SocketAddr;
use std::path::PathBuf;

use axum::body::Bytes;
use axum::extract::rejection::QueryRejection;
use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderValue, Method, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use rubric_core::{ApiError, ArticleRecord, ErrorCode, FileStore, StoreError};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::json;
use tower_http::cors::{AllowOrigin, CorsLayer};

pub const DEFAULT_ADDR: &str = "127.0.0.1:8080";

/// Endpoint → CLI command giving the same capability.
pub const PARITY: &[(&str, &str)] = &[
    ("GET /api/catalogs", "catalog list"),
    ("POST /api/catalogs", "catalog import"),
    ("GET /api/catalogs/{id}", "catalog show"),
    ("GET /api/profiles", "profile list"),
    ("POST /api/profiles", "profile create"),
    ("POST /api/profiles/preview", "profile preview"),
    ("GET /api/profiles/{id}", "profile show"),
    ("PUT /api/profiles/{id}", "profile set-importance"),
    ("DELETE /api/profiles/{id}", "profile delete"),
    ("GET /api/articles", "article list"),
    ("POST /api/articles", "article add"),
    ("GET /api/articles/{id}", "article show"),
    ("PUT /api/articles/{id}", "article edit"),
    ("DELETE /api/articles/{id}", "article delete"),
    ("GET /api/assessments", "assess list"),
    ("POST /api/assessments", "assess new"),
    ("GET /api/assessments/{id}", "assess show"),
    ("PUT /api/assessments/{id}", "assess score"),
    ("DELETE /api/assessments/{id}", "assess delete"),
    ("GET /api/assessments/{id}/rating", "rate"),
    ("GET /api/rankings", "rank"),
    ("POST /api/whatif", "whatif"),
    ("GET /api/stability", "whatif --scan"),
    ("GET /api/exports/ratings", "export ratings"),
    ("GET /api/exports/scores", "export scores"),
    ("POST /api/imports/scores", "import"),
    ("GET /api/error-codes", "error-codes"),
];

/// HTTP status for an error code.
pub fn status_for(code: ErrorCode) -> StatusCode {
    match code {
        ErrorCode::NotFound => StatusCode::NOT_FOUND,
        ErrorCode::Conflict | ErrorCode::Referenced => StatusCode::CONFLICT,
        ErrorCode::BadRequest | ErrorCode::ParseError | ErrorCode::InvalidId => {
            StatusCode::BAD_REQUEST
        }
        ErrorCode::StoreError | ErrorCode::StoreNotInitialized => StatusCode::INTERNAL_SERVER_ERROR,
        _ => StatusCode::UNPROCESSABLE_ENTITY,
    }
}

/// An [`ApiError`] on its way out as a response.
#[derive(Debug)]
pub struct HttpError(pub ApiError);

impl<E: Into<ApiError>> From<E> for HttpError {
    fn from(e: E) -> Self {
        HttpError(e.into())
    }
}

impl IntoResponse for HttpError {
    fn into_response(self) -> Response {
        (status_for(self.0.code), Json(self.0)).into_response()
    }
}

type Reply = Result<Response, HttpError>;

#[derive(Clone)]
struct AppState {
    store: FileStore,
}

async fn run<T, F>(state: &AppState, f: F) -> Result<T, HttpError>
where
    T: Send + 'static,
    F: FnOnce(&FileStore) -> ops::OpResult<T> + Send + 'static,
{
    let store = state.store.clone();
    match tokio::task::spawn_blocking(move || f(&store)).await {
        Ok(r) => r.map_err(HttpError),
        Err(e) => Err(HttpError(ApiError::new(
            ErrorCode::StoreError,
            e.to_string(),
        ))),
    }
}

fn bad_request(message: impl Into<String>) -> HttpError {
    HttpError(ApiError::new(ErrorCode::BadRequest, message))
}

fn body<T: DeserializeOwned>(bytes: &Bytes) -> Result<T, HttpError> {
    serde_json::from_slice(bytes).map_err(|e| bad_request(format!("invalid request body: {e}")))
}

fn text(bytes: Bytes) -> Result<String, HttpError> {
    String::from_utf8(bytes.to_vec()).map_err(|_| bad_request("request body is not UTF-8"))
}

fn query<T>(q: Result<Query<T>, QueryRejection>) -> Result<T, HttpError> {
    q.map(|Query(v)| v).map_err(|e| bad_request(e.body_text()))
}

fn ok<T: Serialize>(value: T) -> Reply {
    Ok(Json(value).into_response())
}

fn created<T: Serialize>(value: T) -> Reply {
    Ok((StatusCode::CREATED, Json(value)).into_response())
}

fn deleted(kind: &str, id: &str) -> Reply {
    ok(json!({ "deleted": kind, "id": id }))
}

fn csv(document: String) -> Reply {
    Ok((
        [(header::CONTENT_TYPE, "text/csv; charset=utf-8")],
        document,
    )
        .into_response())
}

#[derive(Debug, Default, Deserialize)]
struct Page {
    limit: Option<usize>,
    offset: Option<usize>,
}

impl Page {
    fn apply<T>(&self, items: Vec<T>) -> Vec<T> {
        items
            .into_iter()
            .skip(self.offset.unwrap_or(0))
            .take(self.limit.unwrap_or(usize::MAX))
            .collect()
    }
}

#[derive(Debug, Default, Deserialize)]
struct VersionQuery {
    version: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
struct RevisionQuery {
    revision: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
struct ProfileQuery {
    profile: Option<String>,
    revision: Option<u64>,
    limit: Option<usize>,
    offset: Option<usize>,
}

impl ProfileQuery {
    fn required(&self) -> Result<String, HttpError> {
        self.profile
            .clone()
            .ok_or_else(|| bad_request("query parameter `profile` is required"))
    }

    fn page(&self) -> Page {
        Page {
            limit: self.limit,
            offset: self.offset,
        }
    }
}

// ----- handlers -----

async fn error_codes() -> Reply {
    ok(ErrorCode::ALL)
}

async fn list_catalogs(State(s): State<AppState>, q: Result<Query<Page>, QueryRejection>) -> Reply {
    let page = query(q)?;
    ok(page.apply(run(&s, ops::list_catalogs).await?))
}

async fn import_catalog(State(s): State<AppState>, b: Bytes) -> Reply {
    let doc = text(b)?;
    created(run(&s, move |st| ops::import_catalog(st, &doc)).await?)
}

async fn get_catalog(
    State(s): State<AppState>,
    Path(id): Path<String>,
    q: Result<Query<VersionQuery>, QueryRejection>,
) -> Reply {
    let q = query(q)?;
    ok(run(&s, move |st| {
        ops::get_catalog(st, &id, q.version.as_deref())
    })
    .await?)
}

async fn list_profiles(State(s): State<AppState>, q: Result<Query<Page>, QueryRejection>) -> Reply {
    let page = query(q)?;
    ok(page.apply(run(&s, ops::list_profiles).await?))
}

async fn create_profile(State(s): State<AppState>, b: Bytes) -> Reply {
    let input: ops::ProfileInput = body(&b)?;
    created(run(&s, move |st| ops::create_profile(st, &input)).await?)
}

async fn preview_profile(State(s): State<AppState>, b: Bytes) -> Reply {
    let input: ops::ProfileInput = body(&b)?;
    ok(run(&s, move |st| ops::preview_weights(st, &input)).await?)
}

async fn get_profile(
    State(s): State<AppState>,
    Path(id): Path<String>,
    q: Result<Query<RevisionQuery>, QueryRejection>,
) -> Reply {
    let q = query(q)?;
    ok(run(&s, move |st| ops::get_profile(st, &id, q.revision)).await?)
}

async fn update_profile(State(s): State<AppState>, Path(id): Path<String>, b: Bytes) -> Reply {
    let patch: ops::ProfilePatch = body(&b)?;
    ok(run(&s, move |st| ops::update_profile(st, &id, &patch)).await?)
}

async fn delete_profile(State(s): State<AppState>, Path(id): Path<String>) -> Reply {
    let id2 = id.clone();
    run(&s, move |st| ops::delete_profile(st, &id2)).await?;
    deleted("profile", &id)
}

async fn list_articles(State(s): State<AppState>, q: Result<Query<Page>, QueryRejection>) -> Reply {
    let page = query(q)?;
    ok(page.apply(run(&s, ops::list_articles).await?))
}

async fn create_article(State(s): State<AppState>, b: Bytes) -> Reply {
    let article: ArticleRecord = body(&b)?;
    created(run(&s, move |st| ops::create_article(st, &article)).await?)
}

async fn get_article(State(s): State<AppState>, Path(id): Path<String>) -> Reply {
    ok(run(&s, move |st| ops::get_article(st, &id)).await?)
}

async fn update_article(State(s): State<AppState>, Path(id): Path<String>, b: Bytes) -> Reply {
    let patch: ops::ArticlePatch = body(&b)?;
    ok(run(&s, move |st| ops::update_article(st, &id, &patch)).await?)
}

async fn delete_article(State(s): State<AppState>, Path(id): Path<String>) -> Reply {
    let id2 = id.clone();
    run(&s, move |st| ops::delete_article(st, &id2)).await?;
    deleted("article", &id)
}

async fn list_assessments(
    State(s): State<AppState>,
    q: Result<Query<ProfileQuery>, QueryRejection>,
) -> Reply {
    let q = query(q)?;
    let page = q.page();
    let items = run(&s, move |st| {
        ops::list_assessments(st, q.profile.as_deref(), q.revision)
    })
    .await?;
    ok(page.apply(items))
}

async fn create_assessment(State(s): State<AppState>, b: Bytes) -> Reply {
    let input: ops::AssessmentInput = body(&b)?;
    created(run(&s, move |st| ops::create_assessment(st, &input)).await?)
}

async fn get_assessment(State(s): State<AppState>, Path(id): Path<String>) -> Reply {
    ok(run(&s, move |st| ops::get_assessment(st, &id)).await?)
}

async fn update_assessment(State(s): State<AppState>, Path(id): Path<String>, b: Bytes) -> Reply {
    let patch: ops::ScorePatch = body(&b)?;
    ok(run(&s, move |st| ops::update_assessment(st, &id, &patch)).await?)
}

async fn delete_assessment(State(s): State<AppState>, Path(id): Path<String>) -> Reply {
    let id2 = id.clone();
    run(&s, move |st| ops::delete_assessment(st, &id2)).await?;
    deleted("assessment", &id)
}

async fn rating(State(s): State<AppState>, Path(id): Path<String>) -> Reply {
    ok(run(&s, move |st| ops::rating(st, &id)).await?)
}

async fn rankings(
    State(s): State<AppState>,
    q: Result<Query<ProfileQuery>, QueryRejection>,
) -> Reply {
    let q = query(q)?;
    let profile = q.required()?;
    let page = q.page();
    let mut view = run(&s, move |st| ops::ranking(st, &profile, q.revision)).await?;
    view.entries = page.apply(view.entries);
    ok(view)
}

async fn whatif(State(s): State<AppState>, b: Bytes) -> Reply {
    let req: ops::WhatIfRequest = body(&b)?;
    ok(run(&s, move |st| ops::whatif(st, &req)).await?)
}

async fn stability(
    State(s): State<AppState>,
    q: Result<Query<ProfileQuery>, QueryRejection>,
) -> Reply {
    let q = query(q)?;
    let profile = q.required()?;
    ok(run(&s, move |st| ops::stability(st, &profile, q.revision)).await?)
}

async fn export_ratings(
    State(s): State<AppState>,
    q: Result<Query<ProfileQuery>, QueryRejection>,
) -> Reply {
    let q = query(q)?;
    let profile = q.required()?;
    csv(run(&s, move |st| {
        ops::export_ratings_csv(st, &profile, q.revision)
    })
    .await?)
}

async fn export_scores(
    State(s): State<AppState>,
    q: Result<Query<ProfileQuery>, QueryRejection>,
) -> Reply {
    let q = query(q)?;
    let profile = q.required()?;
    csv(run(&s, move |st| {
        ops::export_scores_csv(st, &profile, q.revision)
    })
    .await?)
}

async fn import_scores(
    State(s): State<AppState>,
    q: Result<Query<ProfileQuery>, QueryRejection>,
    b: Bytes,
) -> Reply {
    let q = query(q)?;
    let profile = q.required()?;
    let doc = text(b)?;
    created(
        run(&s, move |st| {
            ops::import_scores_csv(st, &profile, q.revision, &doc)
        })
        .await?,
    )
}

async fn fallback() -> Reply {
    Err(HttpError(ApiError::new(
        ErrorCode::NotFound,
        "no such endpoint",
    )))
}

/// The API routes over an opened store, without CORS.
pub fn router(store: FileStore) -> Router {
    Router::new()
        .route("/api/error-codes", get(error_codes))
        .route("/api/catalogs", get(list_catalogs).post(import_catalog))
        .route("/api/catalogs/{id}", get(get_catalog))
        .route("/api/profiles", get(list_profiles).post(create_profile))
        .route("/api/profiles/preview", post(preview_profile))
        .route(
            "/api/profiles/{id}",
            get(get_profile).put(update_profile).delete(delete_profile),
        )
        .route("/api/articles", get(list_articles).post(create_article))
        .route(
            "/api/articles/{id}",
            get(get_article).put(update_article).delete(delete_article),
        )
        .route(
            "/api/assessments",
            get(list_assessments).post(create_assessment),
        )
        .route(
            "/api/assessments/{id}",
            get(get_assessment)
                .put(update_assessment)
                .delete(delete_assessment),
        )
        .route("/api/assessments/{id}/rating", get(rating))
        .route("/api/rankings", get(rankings))
        .route("/api/whatif", post(whatif))
        .route("/api/stability", get(stability))
        .route("/api/exports/ratings", get(export_ratings))
        .route("/api/exports/scores", get(export_scores))
        .route("/api/imports/scores", post(import_scores))
        .fallback(fallback)
        .with_state(AppState { store })
}

fn cors(origin: Option<&str>) -> Result<CorsLayer, ServeError> {
    let allow = match origin {
        None | Some("*") => AllowOrigin::any(),
        Some(o) => AllowOrigin::exact(
            HeaderValue::from_str(o)
                .map_err(|_| ServeError::Config(format!("invalid CORS origin {o:?}")))?,
        ),
    };
    Ok(CorsLayer::new()
        .allow_origin(allow)
        .allow_methods([Method::GET, Method::POST, Method::PUT, Method::DELETE])
        .allow_headers([header::CONTENT_TYPE]))
}

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub addr: SocketAddr,
    pub store_root: PathBuf,
    /// Origin allowed by CORS; any origin when unset.
    pub cors_origin: Option<String>,
}

#[derive(Debug)]
pub enum ServeError {
    Store(StoreError),
    Bind {
        addr: SocketAddr,
        source: std::io::Error,
    },
    Config(String),
    Io(std::io::Error),
}

impl std::fmt::Display for ServeError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ServeError::Store(e) => write!(f, "store: {e}"),
            ServeError::Bind { addr, source } => write!(f, "cannot bind {addr}: {source}"),
            ServeError::Config(m) => f.write_str(m),
            ServeError::Io(e) => write!(f, "server: {e}"),
        }
    }
}

impl std::error::Error for ServeError {}

/// A bound, not yet running service.
pub struct Server {
    listener: tokio::net::TcpListener,
    app: Router,
}

impl Server {
    /// Opens the store and binds the address; port 0 picks a free port.
    pub async fn bind(config: &ServiceConfig) -> Result<Server, ServeError> {
        let store = FileStore::open(&config.store_root).map_err(ServeError::Store)?;
        let app = router(store).layer(cors(config.cors_origin.as_deref())?);
        let listener = tokio::net::TcpListener::bind(config.addr)
            .await
            .map_err(|source| ServeError::Bind {
                addr: config.addr,
                source,
            })?;
        Ok(Server { listener, app })
    }

    pub fn local_addr(&self) -> std::io::Result<SocketAddr> {
        self.listener.local_addr()
    }

    /// Serves until `shutdown` resolves, then lets in-flight requests finish.
    pub async fn run(
        self,
        shutdown: impl Future<Output = ()> + Send + 'static,
    ) -> Result<(), ServeError> {
        axum::serve(self.listener, self.app)
            .with_graceful_shutdown(shutdown)
            .await
            .map_err(ServeError::Io)
    }
}

/// Resolves on Ctrl-C, or SIGTERM on Unix.
pub async fn shutdown_signal() {
    let ctrl_c = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    #[cfg(unix)]
    let term = async {
        match tokio::signal::unix::signal(tokio::signal::unix::SignalKind::terminate()) {
            Ok(mut s) => {
                s.recv().await;
            }
            Err(_) => std::future::pending::<()>().await,
        }
    };
    #[cfg(not(unix))]
    let term = std::future::pending::<()>();
    tokio::select! {
        _ = ctrl_c => {}
        _ = term => {}
    }
}

/// Binds and serves until a shutdown signal arrives.
pub async fn serve(config: &ServiceConfig) -> Result<(), ServeError> {
    Server::bind(config).await?.run(shutdown_signal()).await
}
