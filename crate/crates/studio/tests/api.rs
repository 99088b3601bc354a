//! HTTP behaviour of the studio service, exercised in-process.

use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use glyphmotion::frame::LoopCount;
use glyphmotion::gif::decode_gif;
use glyphmotion::glyph::{bundled_font, layout_text, CanvasSpec};
use glyphmotion::par::Execution;
use glyphmotion::pipeline::{run_with_inputs, MotionInput, PipelineInputs};
use glyphmotion::raster::{render_frame, render_sequence, RenderSpec};
use glyphmotion_studio::{router, AppState, Session};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

fn fixture(name: &str) -> Vec<u8> {
    let path = format!("{}/../core/tests/fixtures/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read(&path).unwrap_or_else(|e| panic!("{path}: {e}"))
}

struct Client {
    app: Router,
}

impl Client {
    fn new() -> Self {
        Client { app: router(AppState::in_memory()) }
    }

    fn with_state(state: AppState) -> Self {
        Client { app: router(state) }
    }

    async fn raw(&self, method: Method, uri: &str, body: Body, content_type: &str) -> (StatusCode, Vec<u8>) {
        let req = Request::builder().method(method).uri(uri).header("content-type", content_type).body(body).unwrap();
        let resp = self.app.clone().oneshot(req).await.unwrap();
        let status = resp.status();
        (status, resp.into_body().collect().await.unwrap().to_bytes().to_vec())
    }

    async fn json(&self, method: Method, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
        let body = body.map_or(Body::empty(), |v| Body::from(v.to_string()));
        let (status, bytes) = self.raw(method, uri, body, "application/json").await;
        let v = if bytes.is_empty() { Value::Null } else { serde_json::from_slice(&bytes).unwrap() };
        (status, v)
    }

    async fn get(&self, uri: &str) -> (StatusCode, Vec<u8>) {
        self.raw(Method::GET, uri, Body::empty(), "application/json").await
    }

    async fn create(&self) -> String {
        let (status, v) = self.json(Method::POST, "/sessions", None).await;
        assert_eq!(status, StatusCode::CREATED);
        v["id"].as_str().unwrap().to_string()
    }

    async fn upload(&self, id: &str, gif: Vec<u8>) -> (StatusCode, Value) {
        let (status, bytes) = self.raw(Method::POST, &format!("/sessions/{id}/gif"), Body::from(gif), "image/gif").await;
        (status, serde_json::from_slice(&bytes).unwrap())
    }

    async fn text(&self, id: &str, text: &str) -> (StatusCode, Value) {
        self.json(Method::PUT, &format!("/sessions/{id}/text"), Some(json!({ "text": text }))).await
    }

    /// A session with the bouncing disk and `text`.
    async fn ready(&self, text: &str) -> String {
        let id = self.create().await;
        assert_eq!(self.upload(&id, fixture("bouncing_disk.gif")).await.0, StatusCode::OK);
        assert_eq!(self.text(&id, text).await.0, StatusCode::OK);
        id
    }

    async fn patch(&self, id: &str, what: &str, idx: usize, f: usize, x: f64, y: f64) -> (StatusCode, Value) {
        self.json(Method::PATCH, &format!("/sessions/{id}/{what}/{idx}/{f}"), Some(json!({ "x": x, "y": y }))).await
    }

    async fn point(&self, id: &str, what: &str, idx: usize, f: usize) -> Value {
        let (status, v) = self.json(Method::GET, &format!("/sessions/{id}/{what}/{idx}/{f}"), None).await;
        assert_eq!(status, StatusCode::OK, "{v}");
        v
    }

    async fn preview(&self, id: &str, f: usize) -> Vec<u8> {
        let (status, png) = self.get(&format!("/sessions/{id}/preview/{f}")).await;
        assert_eq!(status, StatusCode::OK);
        png
    }

    async fn result(&self, id: &str) -> Vec<u8> {
        let (status, gif) = self.get(&format!("/sessions/{id}/result")).await;
        assert_eq!(status, StatusCode::OK, "{}", String::from_utf8_lossy(&gif));
        gif
    }

    async fn state(&self, id: &str) -> Value {
        self.json(Method::GET, &format!("/sessions/{id}"), None).await.1
    }
}

fn decode_png(bytes: &[u8]) -> Vec<u8> {
    let mut reader = png::Decoder::new(std::io::Cursor::new(bytes)).read_info().unwrap();
    let mut buf = vec![0; reader.output_buffer_size().unwrap()];
    let info = reader.next_frame(&mut buf).unwrap();
    buf.truncate(info.buffer_size());
    buf
}

/// The batch pipeline on the session's exported configuration.
fn from_scratch(session: &Session, gif: Vec<u8>) -> Vec<u8> {
    let cfg = session.pipeline_config();
    let inputs = PipelineInputs { font: None, motion: MotionInput::Gif(gif) };
    run_with_inputs(&cfg, &inputs, Execution::default()).unwrap().gif
}

#[tokio::test]
async fn new_session_has_default_parameters() {
    let c = Client::new();
    let id = c.create().await;
    let (status, p) = c.json(Method::GET, &format!("/sessions/{id}/params"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!((p["alpha"].as_f64(), p["e"].as_f64()), (Some(2.0), Some(2.0)));
    assert_eq!((p["k"].as_u64(), p["n"].as_u64()), (Some(3), Some(10)));
    assert_eq!(c.state(&id).await["revision"], 0);
}

#[tokio::test]
async fn bad_inputs_are_rejected() {
    let c = Client::new();
    let (status, _) = c.json(Method::GET, "/sessions/nope", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);

    let id = c.create().await;
    let mut gif = fixture("static_disk.gif");
    gif.truncate(gif.len() / 2);
    let (status, v) = c.upload(&id, gif).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(v["stage"], "decode");
    assert!(v["offset"].is_u64(), "{v}");

    let (status, v) = c.text(&id, "").await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(v["error"], "no drawable glyphs");

    // nothing to read before a GIF exists
    let (status, _) = c.json(Method::GET, &format!("/sessions/{id}/keypoints/1/1"), None).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(c.state(&id).await["revision"], 0);
}

#[tokio::test]
async fn keypoint_patch_reads_back_and_stays_local() {
    let c = Client::new();
    let id = c.ready("UIST").await;
    let before: Vec<Value> = keypoint_track(&c, &id, 3).await;
    let (status, v) = c.patch(&id, "keypoints", 3, 5, 0.4321, 0.1234).await;
    assert_eq!(status, StatusCode::OK, "{v}");
    assert_eq!(v["revision"], 3);
    let p = c.point(&id, "keypoints", 3, 5).await;
    assert_eq!((p["x"].as_f64(), p["y"].as_f64()), (Some(0.4321), Some(0.1234)));
    assert_eq!(p["edited"], true);
    let after = keypoint_track(&c, &id, 3).await;
    for f in 0..16 {
        if f != 4 {
            assert_eq!(before[f], after[f], "frame {}", f + 1);
        }
    }
    assert_eq!(c.state(&id).await["trajectory_source"], "user-corrected");

    assert_eq!(c.patch(&id, "keypoints", 11, 1, 0.5, 0.5).await.0, StatusCode::NOT_FOUND);
    assert_eq!(c.patch(&id, "keypoints", 1, 17, 0.5, 0.5).await.0, StatusCode::NOT_FOUND);
    assert_eq!(c.patch(&id, "keypoints", 0, 1, 0.5, 0.5).await.0, StatusCode::NOT_FOUND);
    assert_eq!(c.patch(&id, "keypoints", 1, 1, 1.5, 0.5).await.0, StatusCode::UNPROCESSABLE_ENTITY);
}

async fn keypoint_track(c: &Client, id: &str, i: usize) -> Vec<Value> {
    let mut out = Vec::new();
    for f in 1..=16 {
        let p = c.point(id, "keypoints", i, f).await;
        out.push(json!([p["x"], p["y"]]));
    }
    out
}

#[tokio::test]
async fn repeated_patch_keeps_the_content_hash() {
    let c = Client::new();
    let id = c.ready("UIST").await;
    let (_, a) = c.patch(&id, "keypoints", 2, 4, 0.3, 0.3).await;
    let (_, b) = c.patch(&id, "keypoints", 2, 4, 0.3, 0.3).await;
    assert_eq!(a["content_hash"], b["content_hash"]);
    assert_eq!(b["revision"].as_u64(), a["revision"].as_u64().map(|r| r + 1));
    assert_eq!(b["invalidated"], json!([]));
}

#[tokio::test]
async fn keypoint_correction_leaves_other_frames_alone() {
    let c = Client::new();
    let id = c.ready("UIST").await;
    let base: Vec<Vec<u8>> = previews(&c, &id).await;
    c.patch(&id, "keypoints", 1, 6, 0.2, 0.8).await;
    let edited = previews(&c, &id).await;
    for f in 0..16 {
        if f == 5 {
            assert_ne!(base[f], edited[f]);
        } else {
            assert_eq!(base[f], edited[f], "frame {}", f + 1);
        }
    }
}

async fn previews(c: &Client, id: &str) -> Vec<Vec<u8>> {
    let mut out = Vec::new();
    for f in 1..=16 {
        out.push(c.preview(id, f).await);
    }
    out
}

#[tokio::test]
async fn control_patch_changes_one_frame_and_undoes_exactly() {
    let c = Client::new();
    let id = c.ready("UIST").await;
    let base = previews(&c, &id).await;
    let p = c.point(&id, "controls", 10, 5).await;
    let (x, y) = (p["x"].as_f64().unwrap(), p["y"].as_f64().unwrap());
    let (status, v) = c.patch(&id, "controls", 10, 5, x + 0.05, y).await;
    assert_eq!(status, StatusCode::OK, "{v}");
    assert_eq!(v["invalidated"], json!(["render:5"]));
    let edited = previews(&c, &id).await;
    for f in 0..16 {
        assert_eq!(base[f] == edited[f], f != 4, "frame {}", f + 1);
    }

    // the change is confined to the neighbourhood of the moved point
    let (a, b) = (decode_png(&base[4]), decode_png(&edited[4]));
    let (w, h) = (256usize, 256usize);
    let (cx, cy) = (x * w as f64, y * h as f64);
    for (k, (pa, pb)) in a.chunks(4).zip(b.chunks(4)).enumerate() {
        if pa != pb {
            let (px, py) = ((k % w) as f64 + 0.5, (k / w) as f64 + 0.5);
            assert!((px - cx).hypot(py - cy) < 0.05 * w as f64 + 40.0, "pixel ({px}, {py}) changed");
        }
    }

    c.patch(&id, "controls", 10, 5, x, y).await;
    assert_eq!(c.preview(&id, 5).await, base[4]);
    assert_eq!(c.state(&id).await["control_edits"], json!([]));

    let m = c.state(&id).await["control_points"].as_u64().unwrap() as usize;
    assert_eq!(c.patch(&id, "controls", m + 1, 1, 0.5, 0.5).await.0, StatusCode::NOT_FOUND);
    assert_eq!(c.patch(&id, "controls", 1, 1, -0.1, 0.5).await.0, StatusCode::UNPROCESSABLE_ENTITY);
}

#[tokio::test]
async fn first_preview_is_the_static_render() {
    let c = Client::new();
    let id = c.ready("wakey").await;
    let (_, set) = layout_text(&bundled_font(), "wakey", CanvasSpec::new(256, 256), 0.1).unwrap();
    let still = render_frame(&set.contours, &RenderSpec::default()).unwrap();
    assert_eq!(decode_png(&c.preview(&id, 1).await), still.as_bytes());
}

#[tokio::test]
async fn alpha_zero_renders_the_raw_alignment() {
    let c = Client::new();
    let id = c.ready("UIST").await;
    let (status, _) = c.json(Method::PUT, &format!("/sessions/{id}/params"), Some(json!({ "alpha": 0 }))).await;
    assert_eq!(status, StatusCode::OK);
    let gif = c.result(&id).await;

    let mut s = Session::new("probe");
    s.upload_gif(fixture("bouncing_disk.gif")).unwrap();
    let traj = s.trajectories().unwrap();
    let (_, set) = layout_text(&bundled_font(), "UIST", CanvasSpec::new(256, 256), 0.1).unwrap();
    let raw = glyphmotion::align::align_frames(&set.positions(), &traj, 2.0).unwrap().raw;
    let want = render_sequence(Execution::Sequential, &raw, &set, &RenderSpec::default(), &[8; 16], LoopCount::Infinite)
        .unwrap();
    assert_eq!(decode_gif(&gif).unwrap().frames(), want.frames());
}

#[tokio::test]
async fn identical_sessions_give_identical_results() {
    let c = Client::new();
    let a = c.ready("hop").await;
    let b = c.ready("hop").await;
    for id in [&a, &b] {
        c.patch(id, "keypoints", 4, 9, 0.61, 0.4).await;
    }
    assert_eq!(c.result(&a).await, c.result(&b).await);
}

#[tokio::test]
async fn invalid_params_list_every_violation() {
    let c = Client::new();
    let id = c.ready("UIST").await;
    let (status, v) = c
        .json(Method::PUT, &format!("/sessions/{id}/params"), Some(json!({ "alpha": -1, "e": 0, "k": 100000 })))
        .await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(v["violations"].as_array().unwrap().len(), 3, "{v}");
    let (status, v) = c
        .json(Method::PUT, &format!("/sessions/{id}/params"), Some(json!({ "trajectory_source": "extracted_text" })))
        .await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert!(v["violations"][0].as_str().unwrap().contains("not implemented"));
    assert_eq!(c.state(&id).await["revision"], 2);
}

#[tokio::test]
async fn parameter_changes_report_dropped_control_edits() {
    let c = Client::new();
    let id = c.ready("UIST").await;
    let p = c.point(&id, "controls", 3, 7).await;
    c.patch(&id, "controls", 3, 7, p["x"].as_f64().unwrap() + 0.01, p["y"].as_f64().unwrap()).await;

    // same values: nothing invalidated, the edit survives
    let (_, v) = c.json(Method::PUT, &format!("/sessions/{id}/params"), Some(json!({ "alpha": 2 }))).await;
    assert_eq!(v["dropped_control_edits"], json!([]));
    assert_eq!(c.point(&id, "controls", 3, 7).await["edited"], true);

    let (_, v) = c.json(Method::PUT, &format!("/sessions/{id}/params"), Some(json!({ "alpha": 3 }))).await;
    assert_eq!(v["invalidated"], json!(["optimize", "render"]));
    assert_eq!(v["dropped_control_edits"].as_array().unwrap().len(), 1);
    assert_eq!(c.point(&id, "controls", 3, 7).await["edited"], false);

    let (_, v) = c.json(Method::PUT, &format!("/sessions/{id}/params"), Some(json!({ "e": 3 }))).await;
    assert_eq!(v["invalidated"], json!(["align", "optimize", "render"]));
}

#[tokio::test]
async fn svg_export_has_one_document_per_frame() {
    let c = Client::new();
    let id = c.ready("UIST").await;
    let (status, bytes) = c.get(&format!("/sessions/{id}/export/svg")).await;
    assert_eq!(status, StatusCode::OK);
    let v: Value = serde_json::from_slice(&bytes).unwrap();
    assert_eq!(v["manifest"]["frames"].as_array().unwrap().len(), 16);
    assert_eq!(v["documents"].as_array().unwrap().len(), 16);
    assert!(v["documents"][0][1].as_str().unwrap().starts_with("<svg"));
}

/// Edit scripts covering every invalidation path.
async fn scripted(c: &Client, script: usize) -> String {
    let id = c.ready("UIST").await;
    let params = |v: Value| (Method::PUT, format!("/sessions/{id}/params"), v);
    match script {
        0 => {
            c.patch(&id, "keypoints", 2, 3, 0.35, 0.6).await;
            let p = c.point(&id, "controls", 5, 8).await;
            c.patch(&id, "controls", 5, 8, p["x"].as_f64().unwrap(), p["y"].as_f64().unwrap() + 0.02).await;
            let (m, u, b) = params(json!({ "alpha": 2 }));
            c.json(m, &u, Some(b)).await;
        }
        1 => {
            let (m, u, b) = params(json!({ "alpha": 4, "e": 3, "k": 4 }));
            c.json(m, &u, Some(b)).await;
            c.patch(&id, "keypoints", 7, 12, 0.9, 0.1).await;
            c.text(&id, "sleepy").await;
            let p = c.point(&id, "controls", 1, 16).await;
            c.patch(&id, "controls", 1, 16, p["x"].as_f64().unwrap() - 0.03, p["y"].as_f64().unwrap()).await;
        }
        _ => {
            let p = c.point(&id, "controls", 2, 2).await;
            c.patch(&id, "controls", 2, 2, p["x"].as_f64().unwrap(), 0.5).await;
            let (m, u, b) = params(json!({ "n": 6, "weight_mode": "differentiated" }));
            c.json(m, &u, Some(b)).await;
            c.patch(&id, "keypoints", 6, 1, 0.5, 0.5).await;
            c.json(Method::PUT, &format!("/sessions/{id}/text"), Some(json!({ "text": "UIST", "fill": "#204080" })))
                .await;
        }
    }
    id
}

#[tokio::test]
async fn results_match_a_from_scratch_run_and_a_replay() {
    let c = Client::new();
    for script in 0..3 {
        let id = scripted(&c, script).await;
        let gif = c.result(&id).await;
        let (_, log) = c.json(Method::GET, &format!("/sessions/{id}/events"), None).await;
        let events: Vec<glyphmotion_studio::Event> = serde_json::from_value(log["events"].clone()).unwrap();
        let mut replayed = Session::replay("replay", &events, |_| Some(fixture("bouncing_disk.gif"))).unwrap();
        assert_eq!(replayed.result_gif().unwrap(), gif, "script {script} replay");
        assert_eq!(replayed.content_hash(), c.state(&id).await["content_hash"], "script {script}");
        assert_eq!(from_scratch(&replayed, fixture("bouncing_disk.gif")), gif, "script {script} batch");
    }
}

#[tokio::test]
async fn sessions_survive_a_restart() {
    let dir = tempfile::tempdir().unwrap();
    let c = Client::with_state(AppState::with_data_dir(dir.path()).unwrap());
    let id = scripted(&c, 0).await;
    let gif = c.result(&id).await;
    let state = c.state(&id).await;

    let again = Client::with_state(AppState::with_data_dir(dir.path()).unwrap());
    assert_eq!(again.state(&id).await, state);
    assert_eq!(again.result(&id).await, gif);
}
