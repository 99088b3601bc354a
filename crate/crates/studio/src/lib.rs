//! HTTP service behind the interactive studio.
//!
//! Sessions live in memory and can be mirrored to a directory as an
//! append-only event log plus the uploaded GIFs. Requests for one session
//! are serialized; different sessions run concurrently. Point and frame
//! indices in URLs are 1-based and coordinates are normalized to `[0,1]^2`.

mod error;
pub mod session;
mod store;

use std::collections::HashMap;
use std::io;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};

use axum::body::Bytes;
use axum::extract::{DefaultBodyLimit, Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post, put};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};

pub use error::StudioError;
pub use session::{Change, Event, ParamsUpdate, PointState, Session, SessionState, TextSpec, SCHEMA_VERSION};

/// Largest accepted request body.
pub const MAX_UPLOAD_BYTES: usize = 32 << 20;

type Shared = Arc<tokio::sync::Mutex<Session>>;

#[derive(Clone, Default)]
pub struct AppState {
    sessions: Arc<Mutex<HashMap<String, Shared>>>,
    data_dir: Option<PathBuf>,
}

impl AppState {
    pub fn in_memory() -> Self {
        AppState::default()
    }

    /// Persists sessions under `dir` and reloads the ones already there.
    pub fn with_data_dir(dir: impl Into<PathBuf>) -> Result<Self, StudioError> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir)?;
        let mut sessions = HashMap::new();
        for s in store::load_all(&dir)? {
            sessions.insert(s.id().to_string(), Arc::new(tokio::sync::Mutex::new(s)));
        }
        log::info!("loaded {} session(s) from {}", sessions.len(), dir.display());
        Ok(AppState { sessions: Arc::new(Mutex::new(sessions)), data_dir: Some(dir) })
    }

    fn get(&self, id: &str) -> Result<Shared, StudioError> {
        let map = self.sessions.lock().expect("session map poisoned");
        map.get(id).cloned().ok_or_else(|| StudioError::UnknownSession(id.to_string()))
    }

    /// Runs `f` on the session off the async runtime, holding the session
    /// lock throughout, then persists any new events.
    async fn with<T, F>(&self, id: &str, f: F) -> Result<T, StudioError>
    where
        T: Send + 'static,
        F: FnOnce(&mut Session) -> Result<T, StudioError> + Send + 'static,
    {
        let mut guard = self.get(id)?.lock_owned().await;
        let dir = self.data_dir.clone();
        tokio::task::spawn_blocking(move || {
            let before = guard.events().len();
            let out = f(&mut guard)?;
            if let Some(dir) = dir {
                store::append(&dir, &guard, before)?;
            }
            Ok(out)
        })
        .await
        .map_err(|e| StudioError::Io(io::Error::other(format!("session task failed: {e}"))))?
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/events", get(get_events))
        .route("/sessions/{id}/config", get(get_config))
        .route("/sessions/{id}/gif", post(upload_gif))
        .route("/sessions/{id}/text", put(set_text))
        .route("/sessions/{id}/keypoints/{i}/{f}", get(get_keypoint).patch(patch_keypoint))
        .route("/sessions/{id}/controls/{j}/{f}", get(get_control).patch(patch_control))
        .route("/sessions/{id}/params", get(get_params).put(set_params))
        .route("/sessions/{id}/preview/{f}", get(preview))
        .route("/sessions/{id}/result", get(result))
        .route("/sessions/{id}/export/svg", get(export_svg))
        .layer(DefaultBodyLimit::max(MAX_UPLOAD_BYTES))
        .with_state(state)
}

/// Serves until the process is stopped.
pub async fn serve(addr: SocketAddr, state: AppState) -> io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("studio listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(state)).await
}

fn index(raw: &str, what: &str) -> Result<usize, StudioError> {
    raw.parse().map_err(|_| StudioError::OutOfRange(format!("{what} {raw:?} is not a 1-based index")))
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Coords {
    pub x: f64,
    pub y: f64,
}

async fn create_session(State(state): State<AppState>) -> Result<(StatusCode, Json<SessionState>), StudioError> {
    let id = uuid::Uuid::new_v4().simple().to_string();
    let session = Session::new(id.clone());
    if let Some(dir) = &state.data_dir {
        store::create(dir, &id)?;
    }
    let body = session.state();
    state.sessions.lock().expect("session map poisoned").insert(id, Arc::new(tokio::sync::Mutex::new(session)));
    Ok((StatusCode::CREATED, Json(body)))
}

async fn get_session(State(state): State<AppState>, Path(id): Path<String>) -> Result<Json<SessionState>, StudioError> {
    state.with(&id, |s| Ok(s.state())).await.map(Json)
}

#[derive(Serialize)]
struct EventLog {
    version: u32,
    events: Vec<Event>,
}

async fn get_events(State(state): State<AppState>, Path(id): Path<String>) -> Result<Json<impl Serialize>, StudioError> {
    state
        .with(&id, |s| Ok(EventLog { version: SCHEMA_VERSION, events: s.events().to_vec() }))
        .await
        .map(Json)
}

async fn get_config(State(state): State<AppState>, Path(id): Path<String>) -> Result<Response, StudioError> {
    let cfg = state.with(&id, |s| Ok(s.pipeline_config())).await?;
    Ok(Json(cfg).into_response())
}

async fn upload_gif(State(state): State<AppState>, Path(id): Path<String>, body: Bytes) -> Result<Json<impl Serialize>, StudioError> {
    #[derive(Serialize)]
    struct Uploaded {
        #[serde(flatten)]
        change: Change,
        gif: Option<session::GifSummary>,
    }
    state
        .with(&id, move |s| {
            let change = s.upload_gif(body.to_vec())?;
            Ok(Uploaded { change, gif: s.gif_summary() })
        })
        .await
        .map(Json)
}

async fn set_text(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Json(spec): Json<TextSpec>,
) -> Result<Json<Change>, StudioError> {
    state.with(&id, move |s| s.set_text(spec)).await.map(Json)
}

async fn get_keypoint(
    State(state): State<AppState>,
    Path((id, i, f)): Path<(String, String, String)>,
) -> Result<Json<PointState>, StudioError> {
    let (i, f) = (index(&i, "keypoint")?, index(&f, "frame")?);
    state.with(&id, move |s| s.keypoint(i, f)).await.map(Json)
}

async fn patch_keypoint(
    State(state): State<AppState>,
    Path((id, i, f)): Path<(String, String, String)>,
    Json(c): Json<Coords>,
) -> Result<Json<Change>, StudioError> {
    let (i, f) = (index(&i, "keypoint")?, index(&f, "frame")?);
    state.with(&id, move |s| s.patch_keypoint(i, f, c.x, c.y)).await.map(Json)
}

async fn get_control(
    State(state): State<AppState>,
    Path((id, j, f)): Path<(String, String, String)>,
) -> Result<Json<PointState>, StudioError> {
    let (j, f) = (index(&j, "control point")?, index(&f, "frame")?);
    state.with(&id, move |s| s.control(j, f)).await.map(Json)
}

async fn patch_control(
    State(state): State<AppState>,
    Path((id, j, f)): Path<(String, String, String)>,
    Json(c): Json<Coords>,
) -> Result<Json<Change>, StudioError> {
    let (j, f) = (index(&j, "control point")?, index(&f, "frame")?);
    state.with(&id, move |s| s.patch_control(j, f, c.x, c.y)).await.map(Json)
}

async fn get_params(State(state): State<AppState>, Path(id): Path<String>) -> Result<Json<session::SessionParams>, StudioError> {
    state.with(&id, |s| Ok(s.params())).await.map(Json)
}

async fn set_params(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Json(update): Json<ParamsUpdate>,
) -> Result<Json<Change>, StudioError> {
    state.with(&id, move |s| s.set_params(&update)).await.map(Json)
}

fn encode_png(img: &glyphmotion::frame::Raster) -> Result<Vec<u8>, StudioError> {
    let mut out = Vec::new();
    let mut enc = png::Encoder::new(&mut out, img.width(), img.height());
    enc.set_color(png::ColorType::Rgba);
    enc.set_depth(png::BitDepth::Eight);
    let mut w = enc.write_header().map_err(|e| StudioError::stage("encode", e))?;
    w.write_image_data(img.as_bytes()).map_err(|e| StudioError::stage("encode", e))?;
    w.finish().map_err(|e| StudioError::stage("encode", e))?;
    Ok(out)
}

async fn preview(State(state): State<AppState>, Path((id, f)): Path<(String, String)>) -> Result<Response, StudioError> {
    let f = index(&f, "frame")?;
    let png = state.with(&id, move |s| encode_png(&s.preview(f)?)).await?;
    Ok(([(header::CONTENT_TYPE, "image/png")], png).into_response())
}

async fn result(State(state): State<AppState>, Path(id): Path<String>) -> Result<Response, StudioError> {
    let gif = state.with(&id, |s| s.result_gif()).await?;
    Ok(([(header::CONTENT_TYPE, "image/gif")], gif).into_response())
}

async fn export_svg(State(state): State<AppState>, Path(id): Path<String>) -> Result<Response, StudioError> {
    let bundle = state.with(&id, |s| s.svg()).await?;
    Ok(Json(bundle).into_response())
}
