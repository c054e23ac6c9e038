//! HTTP/JSON session API over the discovars pipeline.
//!
//! A client uploads a CSV once, builds a dependency network, then switches
//! centrality measures, Top-n sizes and clusterings against the cached
//! network. Payloads are documented in `docs/api.md`.

use std::future::Future;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use axum::extract::DefaultBodyLimit;
use axum::http::HeaderValue;
use axum::routing::{get, post};
use axum::Router;
use tower_http::cors::{Any, CorsLayer};
use tower_http::services::ServeDir;

pub mod error;
mod handlers;
pub mod session;

pub use error::ApiError;
pub use session::{Session, SessionStore};

pub const DEFAULT_IDLE_TIMEOUT: Duration = Duration::from_secs(3600);
pub const DEFAULT_MAX_UPLOAD_BYTES: usize = 50 * 1024 * 1024;

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub idle_timeout: Duration,
    pub max_upload_bytes: usize,
    /// Static web client served under `/ui`.
    pub ui_dir: Option<PathBuf>,
    /// Sample datasets served under `/samples`.
    pub data_dir: Option<PathBuf>,
    /// Allowed browser origin; any origin when unset.
    pub cors_origin: Option<String>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            idle_timeout: DEFAULT_IDLE_TIMEOUT,
            max_upload_bytes: DEFAULT_MAX_UPLOAD_BYTES,
            ui_dir: None,
            data_dir: None,
            cors_origin: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct AppState {
    pub sessions: Arc<SessionStore>,
}

impl AppState {
    pub fn new(idle_timeout: Duration) -> Self {
        Self {
            sessions: Arc::new(SessionStore::new(idle_timeout)),
        }
    }
}

fn cors(origin: Option<&str>) -> Result<CorsLayer, String> {
    let layer = CorsLayer::new().allow_methods(Any).allow_headers(Any);
    Ok(match origin {
        None => layer.allow_origin(Any),
        Some(o) => {
            let v = HeaderValue::from_str(o).map_err(|_| format!("bad CORS origin `{o}`"))?;
            layer.allow_origin(v)
        }
    })
}

/// The full application around existing state.
pub fn router_with_state(state: AppState, config: &ServiceConfig) -> Result<Router, String> {
    let mut app = Router::new()
        .route("/health", get(handlers::health))
        .route("/datasets", post(handlers::upload))
        .route("/sessions/{id}/network", post(handlers::build_network))
        .route("/sessions/{id}/centrality", get(handlers::centrality))
        .route("/sessions/{id}/topn", get(handlers::topn))
        .route("/sessions/{id}/cluster", post(handlers::cluster))
        .route("/sessions/{id}/stats", get(handlers::stats))
        .with_state(state);
    if let Some(dir) = &config.ui_dir {
        app = app.nest_service("/ui", ServeDir::new(dir));
    }
    if let Some(dir) = &config.data_dir {
        app = app.nest_service("/samples", ServeDir::new(dir));
    }
    Ok(app
        .layer(DefaultBodyLimit::max(config.max_upload_bytes))
        .layer(cors(config.cors_origin.as_deref())?))
}

pub fn router(config: &ServiceConfig) -> Result<Router, String> {
    router_with_state(AppState::new(config.idle_timeout), config)
}

/// Periodically drops idle sessions until the runtime shuts down.
pub fn spawn_evictor(sessions: Arc<SessionStore>) -> tokio::task::JoinHandle<()> {
    let period =
        (sessions.idle_timeout() / 4).clamp(Duration::from_millis(10), Duration::from_secs(60));
    tokio::spawn(async move {
        let mut tick = tokio::time::interval(period);
        loop {
            tick.tick().await;
            sessions.evict_idle();
        }
    })
}

/// Serves on `listener` until `shutdown` resolves, then drains open
/// requests.
pub async fn serve(
    listener: tokio::net::TcpListener,
    config: ServiceConfig,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    let state = AppState::new(config.idle_timeout);
    let app = router_with_state(state.clone(), &config).map_err(std::io::Error::other)?;
    let evictor = spawn_evictor(state.sessions.clone());
    let result = axum::serve(listener, app)
        .with_graceful_shutdown(shutdown)
        .await;
    evictor.abort();
    result
}
