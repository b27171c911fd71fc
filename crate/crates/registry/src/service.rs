//! HTTP interface.
//!
//! | route | effect |
//! |---|---|
//! | `POST /api/v1/instruments` | mint; 201 with `{pid}` and `Location: /{prefix}/{suffix}` |
//! | `GET /api/v1/instruments?cursor=&limit=` | page of entries |
//! | `GET /api/v1/instruments/{prefix}/{suffix}[?version=n]` | canonical record |
//! | `PUT /api/v1/instruments/{prefix}/{suffix}` | update; needs `If-Match: "<version>"` |
//! | `DELETE /api/v1/instruments/{prefix}/{suffix}` | tombstone; 204 |
//! | `GET /{prefix}/{suffix}[?noredirect]` | 302 to the landing page, or the handle record |
//!
//! Tombstoned PIDs answer 410 with their last metadata.

use std::future::Future;
use std::sync::Arc;

use axum::body::Body;
use axum::extract::{Path, Query, RawQuery, State};
use axum::http::{header, HeaderMap, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::Router;
use pidinst::canonical::{canonicalize, MEDIA_TYPE};
use pidinst::{parse_record, Pid};
use serde::Deserialize;
use serde_json::json;
use tokio::net::TcpListener;

use crate::config::RegistryConfig;
use crate::registry::{Registry, RegistryError, Resolution, ResolveMode};

type Shared = Arc<Registry>;

pub fn router(registry: Shared) -> Router {
    Router::new()
        .route("/api/v1/instruments", get(list).post(create))
        .route(
            "/api/v1/instruments/{prefix}/{suffix}",
            get(fetch).put(replace).delete(retire),
        )
        .route("/{prefix}/{suffix}", get(resolve))
        .with_state(registry)
}

/// Opens the registry from `config`, binds its address and serves until
/// `shutdown` completes.
pub async fn serve(config: RegistryConfig, shutdown: impl Future<Output = ()> + Send + 'static) -> Result<(), ServeError> {
    let bind = config.bind;
    let registry = Arc::new(tokio::task::spawn_blocking(move || Registry::open(config)).await??);
    let listener = TcpListener::bind(bind).await?;
    serve_listener(listener, registry, shutdown).await
}

pub async fn serve_listener(
    listener: TcpListener,
    registry: Shared,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> Result<(), ServeError> {
    tracing::info!(addr = %listener.local_addr()?, "serving");
    axum::serve(listener, router(registry))
        .with_graceful_shutdown(shutdown)
        .await?;
    Ok(())
}

#[derive(Debug, thiserror::Error)]
pub enum ServeError {
    #[error(transparent)]
    Registry(#[from] RegistryError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Join(#[from] tokio::task::JoinError),
}

fn error_body(status: StatusCode, code: &str, message: String, extra: Option<serde_json::Value>) -> Response {
    let mut body = json!({"error": code, "message": message});
    if let Some(x) = extra {
        body["report"] = x;
    }
    (status, axum::Json(body)).into_response()
}

/// Maps domain errors onto statuses. `gone` renders the body of a 410.
fn failure(err: RegistryError, gone: impl FnOnce(&crate::registry::Tombstone) -> Response) -> Response {
    use RegistryError::*;
    match err {
        Gone(t) => {
            let mut r = gone(&t);
            *r.status_mut() = StatusCode::GONE;
            r
        }
        NotFound(_) => error_body(StatusCode::NOT_FOUND, "NotFound", err.to_string(), None),
        VersionConflict { .. } => error_body(StatusCode::CONFLICT, "VersionConflict", err.to_string(), None),
        ValidationFailed(ref report) => {
            let extra = serde_json::from_str(&report.to_json()).ok();
            error_body(StatusCode::UNPROCESSABLE_ENTITY, "ValidationFailed", err.to_string(), extra)
        }
        IdentifierMismatch { .. } => error_body(StatusCode::BAD_REQUEST, "IdentifierMismatch", err.to_string(), None),
        AlreadyTombstoned(_) => error_body(StatusCode::GONE, "AlreadyTombstoned", err.to_string(), None),
        StoreUnavailable(_) | Config(_) => {
            tracing::error!(error = %err, "store failure");
            error_body(StatusCode::SERVICE_UNAVAILABLE, "StoreUnavailable", err.to_string(), None)
        }
    }
}

fn canonical_response(status: StatusCode, text: String, version: Option<u64>) -> Response {
    let mut r = Response::new(Body::from(text));
    *r.status_mut() = status;
    r.headers_mut()
        .insert(header::CONTENT_TYPE, HeaderValue::from_static(MEDIA_TYPE));
    if let Some(v) = version {
        r.headers_mut()
            .insert(header::ETAG, HeaderValue::from_str(&format!("\"{v}\"")).expect("digits"));
    }
    r
}

fn json_text(status: StatusCode, text: String) -> Response {
    (status, [(header::CONTENT_TYPE, "application/json")], text).into_response()
}

fn authorize(registry: &Registry, headers: &HeaderMap) -> Result<(), Response> {
    let Some(token) = &registry.config().api_token else {
        return Ok(());
    };
    let presented = headers
        .get(header::AUTHORIZATION)
        .and_then(|v| v.to_str().ok())
        .and_then(|v| v.strip_prefix("Bearer "));
    if presented == Some(token.as_str()) {
        Ok(())
    } else {
        let mut r = error_body(StatusCode::UNAUTHORIZED, "Unauthorized", "a valid bearer token is required".into(), None);
        r.headers_mut()
            .insert(header::WWW_AUTHENTICATE, HeaderValue::from_static("Bearer"));
        Err(r)
    }
}

fn parse_body(body: &str) -> Result<pidinst::InstrumentRecord, Response> {
    parse_record(body).map_err(|e| error_body(StatusCode::BAD_REQUEST, "ParseError", e.to_string(), None))
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> T + Send + 'static) -> Result<T, Response> {
    tokio::task::spawn_blocking(f).await.map_err(|e| {
        error_body(StatusCode::INTERNAL_SERVER_ERROR, "Internal", e.to_string(), None)
    })
}

async fn create(State(reg): State<Shared>, headers: HeaderMap, body: String) -> Response {
    if let Err(r) = authorize(&reg, &headers) {
        return r;
    }
    let record = match parse_body(&body) {
        Ok(r) => r,
        Err(r) => return r,
    };
    let r2 = reg.clone();
    match blocking(move || r2.mint(record)).await {
        Err(r) => r,
        Ok(Err(e)) => failure(e, |_| StatusCode::GONE.into_response()),
        Ok(Ok(pid)) => {
            let location = format!("/{}", pid.value());
            let mut r = (StatusCode::CREATED, axum::Json(json!({"pid": pid.value()}))).into_response();
            r.headers_mut()
                .insert(header::LOCATION, HeaderValue::from_str(&location).expect("PIDs are header-safe"));
            r
        }
    }
}

#[derive(Deserialize)]
struct ListParams {
    cursor: Option<String>,
    limit: Option<usize>,
}

async fn list(State(reg): State<Shared>, Query(p): Query<ListParams>) -> Response {
    let limit = p.limit.unwrap_or(reg.config().page_size);
    match reg.list(p.cursor.as_deref(), limit) {
        Ok(page) => axum::Json(page).into_response(),
        Err(e) => failure(e, |_| StatusCode::GONE.into_response()),
    }
}

#[derive(Deserialize)]
struct VersionParam {
    version: Option<u64>,
}

fn pid_of(prefix: &str, suffix: &str) -> Pid {
    Pid::handle(prefix, suffix)
}

async fn fetch(
    State(reg): State<Shared>,
    Path((prefix, suffix)): Path<(String, String)>,
    Query(q): Query<VersionParam>,
) -> Response {
    match reg.get(&pid_of(&prefix, &suffix), q.version) {
        Ok(s) => canonical_response(StatusCode::OK, canonicalize(&s.record), Some(s.version)),
        Err(e) => failure(e, |t| canonical_response(StatusCode::GONE, canonicalize(&t.record), Some(t.version))),
    }
}

/// Accepts `"3"`, `W/"3"` and a bare `3`.
fn expected_version(headers: &HeaderMap) -> Option<Result<u64, ()>> {
    let raw = headers.get(header::IF_MATCH)?;
    let s = raw.to_str().map_err(|_| ()).map(|s| s.trim().trim_start_matches("W/").trim_matches('"'));
    Some(s.and_then(|s| s.parse().map_err(|_| ())))
}

async fn replace(
    State(reg): State<Shared>,
    Path((prefix, suffix)): Path<(String, String)>,
    headers: HeaderMap,
    body: String,
) -> Response {
    if let Err(r) = authorize(&reg, &headers) {
        return r;
    }
    let expected = match expected_version(&headers) {
        None => {
            return error_body(
                StatusCode::PRECONDITION_REQUIRED,
                "PreconditionRequired",
                "updates need an If-Match header carrying the current version".into(),
                None,
            )
        }
        Some(Err(())) => {
            return error_body(StatusCode::BAD_REQUEST, "BadIfMatch", "If-Match must be a version number".into(), None)
        }
        Some(Ok(v)) => v,
    };
    let record = match parse_body(&body) {
        Ok(r) => r,
        Err(r) => return r,
    };
    let pid = pid_of(&prefix, &suffix);
    let r2 = reg.clone();
    let p2 = pid.clone();
    match blocking(move || r2.update(&p2, record, expected)).await {
        Err(r) => r,
        Ok(Ok(v)) => {
            let mut r = axum::Json(json!({"pid": pid.value(), "version": v})).into_response();
            r.headers_mut()
                .insert(header::ETAG, HeaderValue::from_str(&format!("\"{v}\"")).expect("digits"));
            r
        }
        Ok(Err(e)) => failure(e, |t| canonical_response(StatusCode::GONE, canonicalize(&t.record), Some(t.version))),
    }
}

async fn retire(
    State(reg): State<Shared>,
    Path((prefix, suffix)): Path<(String, String)>,
    headers: HeaderMap,
) -> Response {
    if let Err(r) = authorize(&reg, &headers) {
        return r;
    }
    let pid = pid_of(&prefix, &suffix);
    let r2 = reg.clone();
    match blocking(move || r2.tombstone(&pid)).await {
        Err(r) => r,
        Ok(Ok(())) => StatusCode::NO_CONTENT.into_response(),
        Ok(Err(e)) => failure(e, |_| StatusCode::GONE.into_response()),
    }
}

fn wants_noredirect(query: Option<&str>) -> bool {
    query
        .unwrap_or_default()
        .split('&')
        .any(|p| p == "noredirect" || p.starts_with("noredirect="))
}

async fn resolve(
    State(reg): State<Shared>,
    Path((prefix, suffix)): Path<(String, String)>,
    RawQuery(query): RawQuery,
) -> Response {
    let mode = if wants_noredirect(query.as_deref()) {
        ResolveMode::NoRedirect
    } else {
        ResolveMode::Redirect
    };
    match reg.resolve(&pid_of(&prefix, &suffix), mode) {
        Ok(Resolution::Redirect(url)) => match HeaderValue::from_str(&url) {
            Ok(v) => (StatusCode::FOUND, [(header::LOCATION, v)]).into_response(),
            Err(_) => error_body(StatusCode::INTERNAL_SERVER_ERROR, "BadLandingPage", url, None),
        },
        Ok(Resolution::Record(hr)) => json_text(StatusCode::OK, hr.render()),
        Err(e) => failure(e, |t| json_text(StatusCode::GONE, t.handle_record.render())),
    }
}
