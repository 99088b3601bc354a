//! One authoring session: inputs, user edits and lazily rebuilt stage caches.
//!
//! Every mutation goes through a method that also appends an [`Event`], so a
//! session can be rebuilt from its log with [`Session::replay`]. Indices on
//! this API are 1-based.

use std::collections::BTreeMap;
use std::sync::Arc;

use glyphmotion::align::{align_frames_with, ControlTrajectory};
use glyphmotion::deform::{DeformParams, OptimizerSettings, TrajectorySourceKind, WeightMode};
use glyphmotion::frame::{FrameSequence, Raster, Rgba};
use glyphmotion::geom::Point;
use glyphmotion::gif::{decode_gif, encode_gif};
use glyphmotion::glyph::{bundled_font, layout_text, CanvasSpec, Font, GlyphControlSet, DEFAULT_MARGIN};
use glyphmotion::laplace::{build_neighbor_graph, optimize_all};
use glyphmotion::motion::{
    extract_keypoints, ExtractParams, KeypointTrajectorySet, TrajectorySource, DEFAULT_KEYPOINTS,
};
use glyphmotion::par::{self, Execution};
use glyphmotion::pipeline::{apply_control_edits, apply_keypoint_edits, ControlEdit, KeypointEdit, PipelineConfig};
use glyphmotion::raster::{render_frame, svg_bundle, RenderSpec, SvgBundle};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::StudioError;

pub const SCHEMA_VERSION: u32 = 1;
pub const BUNDLED_FONT_ID: &str = "bundled";

/// Placeholder motion path written into exported pipeline configs.
pub const CONFIG_GIF_NAME: &str = "input.gif";

fn bundled_id() -> String {
    BUNDLED_FONT_ID.to_string()
}

fn default_fill() -> String {
    Rgba::BLACK.to_hex()
}

fn default_background() -> String {
    Rgba::WHITE.to_hex()
}

/// Text and its static appearance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TextSpec {
    pub text: String,
    #[serde(default = "bundled_id")]
    pub font: String,
    #[serde(default = "default_fill")]
    pub fill: String,
    #[serde(default = "default_background")]
    pub background: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Event {
    UploadGif { sha256: String },
    SetText(TextSpec),
    PatchKeypoint(KeypointEdit),
    PatchControl(ControlEdit),
    SetParams { params: DeformParams, n: usize },
}

/// Partial parameter update; absent fields keep their current value.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsUpdate {
    pub alpha: Option<f64>,
    pub e: Option<f64>,
    pub k: Option<usize>,
    pub n: Option<usize>,
    pub optimizer: Option<OptimizerSettings>,
    pub weight_mode: Option<WeightMode>,
    pub trajectory_source: Option<TrajectorySourceKind>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionParams {
    pub alpha: f64,
    pub e: f64,
    pub k: usize,
    pub n: usize,
    pub optimizer: OptimizerSettings,
    pub weight_mode: WeightMode,
    pub trajectory_source: TrajectorySourceKind,
}

/// What a mutation threw away.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Change {
    pub revision: u64,
    pub content_hash: String,
    /// Stage caches that must be rebuilt.
    pub invalidated: Vec<String>,
    pub dropped_keypoint_edits: Vec<KeypointEdit>,
    pub dropped_control_edits: Vec<ControlEdit>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointState {
    pub index: usize,
    pub f: usize,
    pub x: f64,
    pub y: f64,
    pub edited: bool,
    pub revision: u64,
    pub content_hash: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GifSummary {
    pub sha256: String,
    pub width: u32,
    pub height: u32,
    pub frames: usize,
    pub keypoints: usize,
    /// 1-based frames whose keypoints were carried over from the previous frame.
    pub carried_frames: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionState {
    pub version: u32,
    pub id: String,
    pub revision: u64,
    pub content_hash: String,
    pub params: SessionParams,
    pub gif: Option<GifSummary>,
    pub text: Option<TextSpec>,
    pub trajectory_source: Option<TrajectorySource>,
    pub control_points: Option<usize>,
    pub keypoint_edits: Vec<KeypointEdit>,
    pub control_edits: Vec<ControlEdit>,
}

struct GifInput {
    sha256: String,
    bytes: Arc<Vec<u8>>,
    frames: FrameSequence,
    extracted: KeypointTrajectorySet,
    carried: Vec<usize>,
}

pub struct Session {
    id: String,
    revision: u64,
    events: Vec<Event>,
    font: Font,
    gif: Option<GifInput>,
    text: Option<TextSpec>,
    params: DeformParams,
    n: usize,
    keypoint_edits: BTreeMap<(usize, usize), Point>,
    control_edits: BTreeMap<(usize, usize), Point>,
    // caches, cleared from the invalidated stage onward
    controls: Option<GlyphControlSet>,
    aligned: Option<ControlTrajectory>,
    optimized: Option<Vec<Vec<Point>>>,
    renders: Vec<Option<Raster>>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn check_point(x: f64, y: f64) -> Result<Point, StudioError> {
    let p = Point::new(x, y);
    if p.is_finite() && p.in_unit_square() {
        Ok(p)
    } else {
        Err(StudioError::invalid(format!("coordinates ({x}, {y}) outside [0,1]^2")))
    }
}

fn check_index(what: &str, v: usize, max: usize) -> Result<usize, StudioError> {
    if v == 0 || v > max {
        Err(StudioError::OutOfRange(format!("{what} {v} outside 1..={max}")))
    } else {
        Ok(v - 1)
    }
}

const STAGES: [&str; 4] = ["layout", "align", "optimize", "render"];

fn from(stage: &str) -> Vec<String> {
    STAGES.iter().skip_while(|s| **s != stage).map(|s| s.to_string()).collect()
}

impl Session {
    pub fn new(id: impl Into<String>) -> Self {
        Session {
            id: id.into(),
            revision: 0,
            events: Vec::new(),
            font: bundled_font(),
            gif: None,
            text: None,
            params: DeformParams::default(),
            n: DEFAULT_KEYPOINTS,
            keypoint_edits: BTreeMap::new(),
            control_edits: BTreeMap::new(),
            controls: None,
            aligned: None,
            optimized: None,
            renders: Vec::new(),
        }
    }

    /// Rebuilds a session by re-applying `events`. `blob` returns uploaded
    /// GIF bytes by their sha256.
    pub fn replay(
        id: impl Into<String>,
        events: &[Event],
        mut blob: impl FnMut(&str) -> Option<Vec<u8>>,
    ) -> Result<Self, StudioError> {
        let mut s = Session::new(id);
        for ev in events {
            match ev {
                Event::UploadGif { sha256 } => {
                    let bytes = blob(sha256).ok_or_else(|| StudioError::Missing(format!("blob {sha256} not found")))?;
                    s.upload_gif(bytes)?;
                }
                Event::SetText(spec) => {
                    s.set_text(spec.clone())?;
                }
                Event::PatchKeypoint(e) => {
                    s.patch_keypoint(e.i, e.f, e.x, e.y)?;
                }
                Event::PatchControl(e) => {
                    s.patch_control(e.j, e.f, e.x, e.y)?;
                }
                Event::SetParams { params, n } => {
                    s.apply_params(*params, *n)?;
                }
            }
        }
        Ok(s)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn revision(&self) -> u64 {
        self.revision
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    /// Bytes of the current driving GIF.
    pub fn gif_bytes(&self) -> Option<Arc<Vec<u8>>> {
        self.gif.as_ref().map(|g| g.bytes.clone())
    }

    fn record(&mut self, ev: Event) {
        self.events.push(ev);
        self.revision += 1;
    }

    fn keypoint_edit_list(&self) -> Vec<KeypointEdit> {
        self.keypoint_edits.iter().map(|(&(i, f), p)| KeypointEdit { i, f, x: p.x, y: p.y }).collect()
    }

    fn control_edit_list(&self) -> Vec<ControlEdit> {
        self.control_edits.iter().map(|(&(j, f), p)| ControlEdit { j, f, x: p.x, y: p.y }).collect()
    }

    /// Hash of everything that determines the output. Revisions that only
    /// repeat an earlier state share it.
    pub fn content_hash(&self) -> String {
        #[derive(Serialize)]
        struct Canon<'a> {
            version: u32,
            gif: Option<&'a str>,
            text: Option<&'a TextSpec>,
            params: &'a DeformParams,
            n: usize,
            keypoint_edits: Vec<KeypointEdit>,
            control_edits: Vec<ControlEdit>,
        }
        let canon = Canon {
            version: SCHEMA_VERSION,
            gif: self.gif.as_ref().map(|g| g.sha256.as_str()),
            text: self.text.as_ref(),
            params: &self.params,
            n: self.n,
            keypoint_edits: self.keypoint_edit_list(),
            control_edits: self.control_edit_list(),
        };
        sha256_hex(serde_json::to_string(&canon).expect("plain data serializes").as_bytes())
    }

    fn change(&self, invalidated: Vec<String>) -> Change {
        Change {
            revision: self.revision,
            content_hash: self.content_hash(),
            invalidated,
            ..Change::default()
        }
    }

    pub fn params(&self) -> SessionParams {
        SessionParams {
            alpha: self.params.alpha,
            e: self.params.e,
            k: self.params.k_neighbors,
            n: self.n,
            optimizer: self.params.optimizer,
            weight_mode: self.params.weight_mode,
            trajectory_source: self.params.trajectory_source,
        }
    }

    pub fn state(&self) -> SessionState {
        SessionState {
            version: SCHEMA_VERSION,
            id: self.id.clone(),
            revision: self.revision,
            content_hash: self.content_hash(),
            params: self.params(),
            gif: self.gif.as_ref().map(|g| GifSummary {
                sha256: g.sha256.clone(),
                width: g.frames.width(),
                height: g.frames.height(),
                frames: g.frames.len(),
                keypoints: g.extracted.n,
                carried_frames: g.carried.iter().map(|f| f + 1).collect(),
            }),
            text: self.text.clone(),
            trajectory_source: self.gif.as_ref().map(|_| {
                if self.keypoint_edits.is_empty() {
                    TrajectorySource::Extracted
                } else {
                    TrajectorySource::UserCorrected
                }
            }),
            control_points: self.controls.as_ref().map(|c| c.total_points),
            keypoint_edits: self.keypoint_edit_list(),
            control_edits: self.control_edit_list(),
        }
    }

    /// The equivalent batch configuration. Its motion source is
    /// [`CONFIG_GIF_NAME`], to be replaced by the uploaded GIF.
    pub fn pipeline_config(&self) -> PipelineConfig {
        let text = self.text.clone().unwrap_or_else(|| TextSpec {
            text: String::new(),
            font: bundled_id(),
            fill: default_fill(),
            background: default_background(),
        });
        PipelineConfig {
            text: text.text,
            gif: Some(CONFIG_GIF_NAME.into()),
            alpha: self.params.alpha,
            e: self.params.e,
            k: self.params.k_neighbors,
            n: self.n,
            optimizer: self.params.optimizer,
            weight_mode: self.params.weight_mode,
            source: self.params.trajectory_source,
            fill: text.fill,
            background: text.background,
            keypoint_edits: self.keypoint_edit_list(),
            control_edits: self.control_edit_list(),
            ..PipelineConfig::default()
        }
    }

    // -- invalidation --

    fn clear_from(&mut self, stage: &str) -> (Vec<String>, Vec<ControlEdit>) {
        let stages = from(stage);
        let mut dropped = Vec::new();
        for s in &stages {
            match s.as_str() {
                "layout" => self.controls = None,
                "align" => self.aligned = None,
                "optimize" => {
                    self.optimized = None;
                    dropped = self.control_edit_list();
                    self.control_edits.clear();
                }
                _ => self.renders.iter_mut().for_each(|r| *r = None),
            }
        }
        (stages, dropped)
    }

    // -- inputs --

    pub fn upload_gif(&mut self, bytes: Vec<u8>) -> Result<Change, StudioError> {
        let frames = decode_gif(&bytes).map_err(|e| StudioError::Invalid {
            message: format!("decode stage failed: {e}"),
            stage: Some("decode"),
            offset: e.offset(),
        })?;
        let ex = extract_keypoints(&frames, &self.extract_params(self.n)).map_err(|e| StudioError::stage("extract", e))?;
        let sha256 = sha256_hex(&bytes);
        self.renders = vec![None; frames.len()];
        self.gif = Some(GifInput {
            sha256: sha256.clone(),
            bytes: Arc::new(bytes),
            frames,
            extracted: ex.trajectories,
            carried: ex.carried_frames,
        });
        let dropped_kp = self.keypoint_edit_list();
        self.keypoint_edits.clear();
        let (stages, dropped) = self.clear_from("layout");
        self.record(Event::UploadGif { sha256 });
        let mut invalidated = vec!["decode".to_string(), "extract".to_string()];
        invalidated.extend(stages);
        Ok(Change {
            dropped_keypoint_edits: dropped_kp,
            dropped_control_edits: dropped,
            ..self.change(invalidated)
        })
    }

    pub fn gif_summary(&self) -> Option<GifSummary> {
        self.state().gif
    }

    fn extract_params(&self, n: usize) -> ExtractParams {
        ExtractParams { n, ..ExtractParams::default() }
    }

    fn canvas(&self) -> Option<CanvasSpec> {
        self.gif.as_ref().map(|g| CanvasSpec::new(g.frames.width(), g.frames.height()))
    }

    pub fn set_text(&mut self, spec: TextSpec) -> Result<Change, StudioError> {
        if spec.font != BUNDLED_FONT_ID {
            return Err(StudioError::invalid(format!("unknown font id {:?}; available: {BUNDLED_FONT_ID}", spec.font)));
        }
        for (name, c) in [("fill", &spec.fill), ("background", &spec.background)] {
            if Rgba::from_hex(c).is_none() {
                return Err(StudioError::invalid(format!("{name} is not a #rrggbb color: {c:?}")));
            }
        }
        let canvas = self.canvas().unwrap_or(CanvasSpec::new(256, 256));
        let (_, controls) =
            layout_text(&self.font, &spec.text, canvas, DEFAULT_MARGIN).map_err(|e| StudioError::invalid(e.to_string()))?;
        let same_glyphs = self.text.as_ref().is_some_and(|t| t.text == spec.text && t.font == spec.font);
        let (stages, dropped) = if same_glyphs { self.clear_from("render") } else { self.clear_from("layout") };
        if self.gif.is_some() && !same_glyphs {
            self.controls = Some(controls);
        }
        self.text = Some(spec.clone());
        self.record(Event::SetText(spec));
        Ok(Change { dropped_control_edits: dropped, ..self.change(stages) })
    }

    // -- keypoints --

    fn gif_input(&self) -> Result<&GifInput, StudioError> {
        self.gif.as_ref().ok_or_else(|| StudioError::Missing("upload a GIF first".into()))
    }

    fn keypoint_index(&self, i: usize, f: usize) -> Result<(usize, usize), StudioError> {
        let g = self.gif_input()?;
        Ok((check_index("keypoint", i, g.extracted.n)?, check_index("frame", f, g.extracted.f)?))
    }

    pub fn keypoint(&self, i: usize, f: usize) -> Result<PointState, StudioError> {
        let (i0, f0) = self.keypoint_index(i, f)?;
        let edit = self.keypoint_edits.get(&(i, f));
        let p = edit.copied().unwrap_or_else(|| self.gif.as_ref().expect("checked").extracted.get(i0, f0));
        Ok(self.point_state(i, f, p, edit.is_some()))
    }

    fn point_state(&self, index: usize, f: usize, p: Point, edited: bool) -> PointState {
        PointState {
            index,
            f,
            x: p.x,
            y: p.y,
            edited,
            revision: self.revision,
            content_hash: self.content_hash(),
        }
    }

    pub fn patch_keypoint(&mut self, i: usize, f: usize, x: f64, y: f64) -> Result<Change, StudioError> {
        let (i0, f0) = self.keypoint_index(i, f)?;
        let p = check_point(x, y)?;
        let base = self.gif_input()?.extracted.get(i0, f0);
        let before = self.keypoint_edits.get(&(i, f)).copied().unwrap_or(base);
        if p == base {
            self.keypoint_edits.remove(&(i, f));
        } else {
            self.keypoint_edits.insert((i, f), p);
        }
        let (stages, dropped) = if p == before { (Vec::new(), Vec::new()) } else { self.clear_from("align") };
        self.record(Event::PatchKeypoint(KeypointEdit { i, f, x, y }));
        Ok(Change { dropped_control_edits: dropped, ..self.change(stages) })
    }

    /// Extracted keypoints with the user's corrections applied.
    pub fn trajectories(&self) -> Result<KeypointTrajectorySet, StudioError> {
        let mut t = self.gif_input()?.extracted.clone();
        apply_keypoint_edits(&mut t, &self.keypoint_edit_list()).map_err(|e| StudioError::stage("edit", e))?;
        Ok(t)
    }

    // -- lazily rebuilt stages --

    fn ensure_layout(&mut self) -> Result<&GlyphControlSet, StudioError> {
        if self.controls.is_none() {
            let canvas = self.canvas().ok_or_else(|| StudioError::Missing("upload a GIF first".into()))?;
            let text = self.text.as_ref().ok_or_else(|| StudioError::Missing("set the text first".into()))?;
            let (_, controls) =
                layout_text(&self.font, &text.text, canvas, DEFAULT_MARGIN).map_err(|e| StudioError::stage("layout", e))?;
            self.controls = Some(controls);
        }
        Ok(self.controls.as_ref().expect("just built"))
    }

    fn ensure_aligned(&mut self) -> Result<(), StudioError> {
        if self.aligned.is_none() {
            let c0 = self.ensure_layout()?.positions();
            let traj = self.trajectories()?;
            let aligned =
                align_frames_with(Execution::default(), &c0, &traj, self.params.e).map_err(|e| StudioError::stage("align", e))?;
            self.aligned = Some(aligned);
        }
        Ok(())
    }

    fn ensure_optimized(&mut self) -> Result<&[Vec<Point>], StudioError> {
        if self.optimized.is_none() {
            self.ensure_aligned()?;
            let c0 = self.controls.as_ref().expect("aligned implies layout").positions();
            let problems = self.params.violations(Some(c0.len()));
            if !problems.is_empty() {
                return Err(StudioError::Violations(problems));
            }
            let graph = build_neighbor_graph(&c0, self.params.k_neighbors).map_err(|e| StudioError::stage("optimize", e))?;
            let raw = &self.aligned.as_ref().expect("just built").raw;
            let (optimized, _) = optimize_all(Execution::default(), raw, &c0, &graph, &self.params)
                .map_err(|e| StudioError::stage("optimize", e))?;
            self.optimized = Some(optimized);
        }
        Ok(self.optimized.as_deref().expect("just built"))
    }

    /// Optimized control points with the user's edits applied, frame-major.
    pub fn positions(&mut self) -> Result<Vec<Vec<Point>>, StudioError> {
        let mut positions = self.ensure_optimized()?.to_vec();
        apply_control_edits(&mut positions, &self.control_edit_list()).map_err(|e| StudioError::stage("edit", e))?;
        Ok(positions)
    }

    fn render_spec(&self) -> Result<RenderSpec, StudioError> {
        let canvas = self.canvas().ok_or_else(|| StudioError::Missing("upload a GIF first".into()))?;
        let text = self.text.as_ref().ok_or_else(|| StudioError::Missing("set the text first".into()))?;
        let colors = |c: &str| Rgba::from_hex(c).expect("validated by set_text");
        Ok(RenderSpec {
            width: canvas.width,
            height: canvas.height,
            fill: colors(&text.fill),
            background: colors(&text.background),
            ..RenderSpec::default()
        })
    }

    /// Renders every frame in `wanted` (0-based) that is not cached.
    fn ensure_renders(&mut self, wanted: &[usize]) -> Result<(), StudioError> {
        let missing: Vec<usize> = wanted.iter().copied().filter(|&f| self.renders[f].is_none()).collect();
        if missing.is_empty() {
            return Ok(());
        }
        let spec = self.render_spec()?;
        let positions = self.positions()?;
        let controls = self.controls.as_ref().expect("positions implies layout");
        let rendered = par::try_map_indexed(Execution::default(), missing.len(), |k| {
            let contours = controls.contours_at(&positions[missing[k]]).expect("edits keep the point count");
            render_frame(&contours, &spec)
        })
        .map_err(|e| StudioError::stage("render", e))?;
        for (f, img) in missing.into_iter().zip(rendered) {
            self.renders[f] = Some(img);
        }
        Ok(())
    }

    // -- control points --

    fn control_index(&mut self, j: usize, f: usize) -> Result<(usize, usize), StudioError> {
        let frames = self.gif_input()?.frames.len();
        let f0 = check_index("frame", f, frames)?;
        let m = self.ensure_layout()?.total_points;
        Ok((check_index("control point", j, m)?, f0))
    }

    pub fn control(&mut self, j: usize, f: usize) -> Result<PointState, StudioError> {
        let (j0, f0) = self.control_index(j, f)?;
        let edit = self.control_edits.get(&(j, f)).copied();
        let p = match edit {
            Some(p) => p,
            None => self.ensure_optimized()?[f0][j0],
        };
        Ok(self.point_state(j, f, p, edit.is_some()))
    }

    pub fn patch_control(&mut self, j: usize, f: usize, x: f64, y: f64) -> Result<Change, StudioError> {
        let (j0, f0) = self.control_index(j, f)?;
        let p = check_point(x, y)?;
        let base = self.ensure_optimized()?[f0][j0];
        let before = self.control_edits.get(&(j, f)).copied().unwrap_or(base);
        if p == base {
            self.control_edits.remove(&(j, f));
        } else {
            self.control_edits.insert((j, f), p);
        }
        let mut invalidated = Vec::new();
        if p != before {
            self.renders[f0] = None;
            invalidated.push(format!("render:{f}"));
        }
        self.record(Event::PatchControl(ControlEdit { j, f, x, y }));
        Ok(self.change(invalidated))
    }

    // -- parameters --

    pub fn set_params(&mut self, update: &ParamsUpdate) -> Result<Change, StudioError> {
        let p = DeformParams {
            alpha: update.alpha.unwrap_or(self.params.alpha),
            e: update.e.unwrap_or(self.params.e),
            k_neighbors: update.k.unwrap_or(self.params.k_neighbors),
            optimizer: update.optimizer.unwrap_or(self.params.optimizer),
            weight_mode: update.weight_mode.unwrap_or(self.params.weight_mode),
            trajectory_source: update.trajectory_source.unwrap_or(self.params.trajectory_source),
        };
        self.apply_params(p, update.n.unwrap_or(self.n))
    }

    fn apply_params(&mut self, p: DeformParams, n: usize) -> Result<Change, StudioError> {
        let m = match (&self.gif, &self.text) {
            (Some(_), Some(_)) => Some(self.ensure_layout()?.total_points),
            _ => None,
        };
        let mut problems = p.violations(m);
        if n == 0 {
            problems.push("n must be >= 1".into());
        }
        if p.trajectory_source == TrajectorySourceKind::ExtractedText {
            problems.push("trajectory source extracted_text is not implemented; use driving_gif".into());
        }
        if !problems.is_empty() {
            return Err(StudioError::Violations(problems));
        }
        let mut change = Change::default();
        let mut invalidated = Vec::new();
        if n != self.n {
            if let Some(g) = &self.gif {
                let ex = extract_keypoints(&g.frames, &self.extract_params(n)).map_err(|e| StudioError::stage("extract", e))?;
                let g = self.gif.as_mut().expect("checked");
                g.extracted = ex.trajectories;
                g.carried = ex.carried_frames;
                change.dropped_keypoint_edits = self.keypoint_edit_list();
                self.keypoint_edits.clear();
                invalidated.push("extract".to_string());
            }
        }
        let stage = if !invalidated.is_empty() || p.e != self.params.e {
            Some("align")
        } else if p != self.params {
            Some("optimize")
        } else {
            None
        };
        if let Some(stage) = stage {
            let (stages, dropped) = self.clear_from(stage);
            invalidated.extend(stages);
            change.dropped_control_edits = dropped;
        }
        self.params = p;
        self.n = n;
        self.record(Event::SetParams { params: p, n });
        Ok(Change { revision: self.revision, content_hash: self.content_hash(), invalidated, ..change })
    }

    // -- outputs --

    /// Frame `f` (1-based) with edits applied.
    pub fn preview(&mut self, f: usize) -> Result<Raster, StudioError> {
        let frames = self.gif_input()?.frames.len();
        let f0 = check_index("frame", f, frames)?;
        self.ensure_renders(&[f0])?;
        Ok(self.renders[f0].clone().expect("just rendered"))
    }

    pub fn result_frames(&mut self) -> Result<FrameSequence, StudioError> {
        let all: Vec<usize> = (0..self.gif_input()?.frames.len()).collect();
        self.ensure_renders(&all)?;
        let g = self.gif.as_ref().expect("checked");
        let frames = self.renders.iter().map(|r| r.clone().expect("all rendered")).collect();
        FrameSequence::new(frames, g.frames.delays().to_vec(), g.frames.loop_count()).map_err(|e| StudioError::stage("render", e))
    }

    pub fn result_gif(&mut self) -> Result<Vec<u8>, StudioError> {
        let seq = self.result_frames()?;
        encode_gif(&seq).map_err(|e| StudioError::stage("encode", e))
    }

    pub fn svg(&mut self) -> Result<SvgBundle, StudioError> {
        let spec = self.render_spec()?;
        let positions = self.positions()?;
        let controls = self.controls.as_ref().expect("positions implies layout");
        let contours: Vec<_> = positions.iter().map(|p| controls.contours_at(p).expect("same point count")).collect();
        Ok(svg_bundle(&contours, self.gif_input()?.frames.delays(), &spec))
    }
}
