use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::deform::{DeformParams, OptimizerSettings, TrajectorySourceKind, WeightMode};
use crate::frame::Rgba;
use crate::glyph::{CanvasSpec, DEFAULT_MARGIN};
use crate::motion::{ExtractParams, DEFAULT_KEYPOINTS};
use crate::raster::RenderSpec;

/// Delay used when the motion comes from a trajectory file and no override is set.
pub const DEFAULT_TRAJECTORY_DELAY: u16 = 10;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Every glyph control point follows the motion.
    #[default]
    Glyph,
    /// One anchor per word; words move rigidly.
    Wordcloud,
}

/// A fixed word position for word-cloud mode. `x`, `y` are the normalized
/// center, `size` the em height in pixels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WordPlacement {
    pub word: String,
    pub x: f64,
    pub y: f64,
    pub size: f64,
}

/// Overrides one keypoint position after extraction. Indices are 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KeypointEdit {
    pub i: usize,
    pub f: usize,
    pub x: f64,
    pub y: f64,
}

/// Overrides one optimized control point. Indices are 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ControlEdit {
    pub j: usize,
    pub f: usize,
    pub x: f64,
    pub y: f64,
}

/// Everything a run needs. Field names match the command-line flags.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub text: String,
    /// TrueType file; the bundled font when absent.
    pub font: Option<PathBuf>,
    pub gif: Option<PathBuf>,
    pub trajectory: Option<PathBuf>,
    pub mode: Mode,
    pub alpha: f64,
    pub e: f64,
    pub k: usize,
    pub n: usize,
    pub optimizer: OptimizerSettings,
    pub weight_mode: WeightMode,
    pub source: TrajectorySourceKind,
    /// Canvas size; defaults to the driving GIF size, or 256x256.
    pub width: Option<u32>,
    pub height: Option<u32>,
    pub margin: f64,
    pub fill: String,
    pub background: String,
    pub supersample: u32,
    pub tolerance: f64,
    /// Foreground threshold of the keypoint tracker.
    pub threshold: f64,
    /// Per-frame delay override in centiseconds.
    pub delay: Option<u16>,
    pub words: Vec<WordPlacement>,
    pub keypoint_edits: Vec<KeypointEdit>,
    pub control_edits: Vec<ControlEdit>,
    pub out: Option<PathBuf>,
    pub svg_dir: Option<PathBuf>,
    pub report: Option<PathBuf>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        let d = DeformParams::default();
        let render = RenderSpec::default();
        PipelineConfig {
            text: String::new(),
            font: None,
            gif: None,
            trajectory: None,
            mode: Mode::default(),
            alpha: d.alpha,
            e: d.e,
            k: d.k_neighbors,
            n: DEFAULT_KEYPOINTS,
            optimizer: d.optimizer,
            weight_mode: d.weight_mode,
            source: d.trajectory_source,
            width: None,
            height: None,
            margin: DEFAULT_MARGIN,
            fill: render.fill.to_hex(),
            background: render.background.to_hex(),
            supersample: render.supersample,
            tolerance: render.tolerance,
            threshold: ExtractParams::default().threshold,
            delay: None,
            words: Vec::new(),
            keypoint_edits: Vec::new(),
            control_edits: Vec::new(),
            out: None,
            svg_dir: None,
            report: None,
        }
    }
}

impl PipelineConfig {
    pub fn from_json(json: &str) -> Result<Self, String> {
        serde_json::from_str(json).map_err(|e| e.to_string())
    }

    pub fn deform_params(&self) -> DeformParams {
        DeformParams {
            alpha: self.alpha,
            e: self.e,
            k_neighbors: self.k,
            optimizer: self.optimizer,
            trajectory_source: self.source,
            weight_mode: self.weight_mode,
        }
    }

    pub fn extract_params(&self) -> ExtractParams {
        ExtractParams {
            n: self.n,
            threshold: self.threshold,
            ..ExtractParams::default()
        }
    }

    pub fn canvas(&self, gif_size: Option<(u32, u32)>) -> CanvasSpec {
        let (gw, gh) = gif_size.unwrap_or((256, 256));
        CanvasSpec::new(self.width.unwrap_or(gw), self.height.unwrap_or(gh))
    }

    pub fn render_spec(&self, canvas: CanvasSpec) -> RenderSpec {
        RenderSpec {
            width: canvas.width,
            height: canvas.height,
            background: Rgba::from_hex(&self.background).unwrap_or(Rgba::WHITE),
            fill: Rgba::from_hex(&self.fill).unwrap_or(Rgba::BLACK),
            supersample: self.supersample,
            tolerance: self.tolerance,
        }
    }

    /// Checks that do not need any input file. Returns every problem found.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        match (&self.gif, &self.trajectory) {
            (None, None) => out.push("a motion source is required: set gif or trajectory".to_string()),
            (Some(_), Some(_)) => out.push("gif and trajectory are mutually exclusive".to_string()),
            _ => {}
        }
        if self.mode == Mode::Glyph && self.text.trim().is_empty() {
            out.push("text must contain at least one drawable character".to_string());
        }
        if self.mode == Mode::Wordcloud && self.words.is_empty() && self.text.split_whitespace().next().is_none() {
            out.push("word cloud needs words or text".to_string());
        }
        if self.source == TrajectorySourceKind::ExtractedText {
            out.push("trajectory source extracted_text is not implemented; use driving_gif".to_string());
        }
        if self.n == 0 {
            out.push("n must be >= 1".to_string());
        }
        out.extend(self.deform_params().violations(None));
        if Rgba::from_hex(&self.fill).is_none() {
            out.push(format!("fill is not a #rrggbb color: {:?}", self.fill));
        }
        if Rgba::from_hex(&self.background).is_none() {
            out.push(format!("background is not a #rrggbb color: {:?}", self.background));
        }
        if let Err(e) = self.render_spec(self.canvas(None)).validate() {
            out.push(e.to_string());
        }
        if self.width == Some(0) || self.height == Some(0) {
            out.push("canvas width and height must be > 0".to_string());
        }
        if !(0.0..0.5).contains(&self.margin) {
            out.push(format!("margin must be in [0, 0.5) (got {})", self.margin));
        }
        if self.delay == Some(0) {
            out.push("delay must be > 0".to_string());
        }
        for w in &self.words {
            if w.word.trim().is_empty() || !(w.size.is_finite() && w.size > 0.0) {
                out.push(format!("bad word placement {:?}", w.word));
            }
        }
        out
    }
}
