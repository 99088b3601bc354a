use std::error::Error as StdError;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::Instant;

use thiserror::Error;

use super::config::{ControlEdit, KeypointEdit, Mode, PipelineConfig, DEFAULT_TRAJECTORY_DELAY};
use super::report::{Report, ReportRecord, FRAME_BUDGET_MS};
use super::wordcloud::{build_word_cloud, spiral_layout};
use crate::align::{align_frames_with, ControlTrajectory};
use crate::frame::{FrameSequence, LoopCount};
use crate::geom::Point;
use crate::gif::{decode_gif, encode_gif};
use crate::glyph::{layout_text, Font, GlyphControlSet, BUNDLED_FONT};
use crate::laplace::{build_neighbor_graph, optimize_all};
use crate::motion::{extract_keypoints, import_trajectories, KeypointTrajectorySet, TrajectorySource};
use crate::par::Execution;
use crate::raster::{render_sequence, svg_bundle, SvgBundle};

type BoxError = Box<dyn StdError + Send + Sync>;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("invalid configuration: {}", .0.join("; "))]
    Config(Vec<String>),
    #[error("{stage} stage failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: BoxError,
    },
}

impl PipelineError {
    pub fn stage(&self) -> Option<&'static str> {
        match self {
            PipelineError::Stage { stage, .. } => Some(stage),
            PipelineError::Config(_) => None,
        }
    }
}

fn at<E: Into<BoxError>>(stage: &'static str) -> impl FnOnce(E) -> PipelineError {
    move |e| PipelineError::Stage { stage, source: e.into() }
}

#[derive(Clone, Debug, PartialEq)]
pub enum MotionInput {
    Gif(Vec<u8>),
    /// Trajectory JSON text.
    Trajectory(String),
}

/// File contents a run needs, already read into memory.
#[derive(Clone, Debug, PartialEq)]
pub struct PipelineInputs {
    /// TrueType bytes; the bundled font when `None`.
    pub font: Option<Vec<u8>>,
    pub motion: MotionInput,
}

/// Everything a run produces. Nothing touches the disk until [`Artifacts::write`].
#[derive(Clone, Debug)]
pub struct Artifacts {
    pub gif: Vec<u8>,
    pub frames: FrameSequence,
    pub svg: Option<SvgBundle>,
    pub report: Report,
    pub trajectories: KeypointTrajectorySet,
    pub controls: GlyphControlSet,
    /// Glyph mode: per control point. Word-cloud mode: per word anchor.
    pub control_trajectory: ControlTrajectory,
}

pub fn load_inputs(cfg: &PipelineConfig) -> Result<PipelineInputs, PipelineError> {
    let read = |p: &PathBuf| fs::read(p).map_err(|e| at("load")(format!("{}: {e}", p.display())));
    let font = cfg.font.as_ref().map(read).transpose()?;
    let motion = match (&cfg.gif, &cfg.trajectory) {
        (Some(g), None) => MotionInput::Gif(read(g)?),
        (None, Some(t)) => {
            let bytes = read(t)?;
            MotionInput::Trajectory(String::from_utf8(bytes).map_err(|e| at("load")(format!("{}: {e}", t.display())))?)
        }
        _ => return Err(PipelineError::Config(cfg.violations())),
    };
    Ok(PipelineInputs { font, motion })
}

/// Reads the inputs named in `cfg` and runs every stage.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<Artifacts, PipelineError> {
    let problems = cfg.violations();
    if !problems.is_empty() {
        return Err(PipelineError::Config(problems));
    }
    let inputs = load_inputs(cfg)?;
    run_with_inputs(cfg, &inputs, Execution::default())
}

/// Replaces keypoints in place. Indices are 1-based.
pub fn apply_keypoint_edits(traj: &mut KeypointTrajectorySet, edits: &[KeypointEdit]) -> Result<(), String> {
    for ed in edits {
        if ed.i == 0 || ed.i > traj.n || ed.f == 0 || ed.f > traj.f {
            return Err(format!("keypoint edit ({}, {}) outside {}x{}", ed.i, ed.f, traj.n, traj.f));
        }
        let p = Point::new(ed.x, ed.y);
        if !p.is_finite() || !p.in_unit_square() {
            return Err(format!("keypoint edit ({}, {}) has coordinate outside [0,1]^2", ed.i, ed.f));
        }
        traj.set(ed.i - 1, ed.f - 1, p);
        traj.source = TrajectorySource::UserCorrected;
    }
    Ok(())
}

/// Replaces control points in place. Indices are 1-based.
pub fn apply_control_edits(positions: &mut [Vec<Point>], edits: &[ControlEdit]) -> Result<(), String> {
    for ed in edits {
        let m = positions.first().map_or(0, Vec::len);
        if ed.j == 0 || ed.j > m || ed.f == 0 || ed.f > positions.len() {
            return Err(format!("control edit ({}, {}) outside {}x{}", ed.j, ed.f, m, positions.len()));
        }
        let p = Point::new(ed.x, ed.y);
        if !p.is_finite() || !p.in_unit_square() {
            return Err(format!("control edit ({}, {}) has coordinate outside [0,1]^2", ed.j, ed.f));
        }
        positions[ed.f - 1][ed.j - 1] = p;
    }
    Ok(())
}

struct Motion {
    traj: KeypointTrajectorySet,
    delays: Vec<u16>,
    loop_count: LoopCount,
    size: Option<(u32, u32)>,
}

fn motion_stage(cfg: &PipelineConfig, input: &MotionInput, report: &mut Report) -> Result<Motion, PipelineError> {
    let mut motion = match input {
        MotionInput::Gif(bytes) => {
            let t = Instant::now();
            let seq = decode_gif(bytes).map_err(at("decode"))?;
            report.stage("decode", ms(t));
            let t = Instant::now();
            let ex = extract_keypoints(&seq, &cfg.extract_params()).map_err(at("extract"))?;
            for f in &ex.carried_frames {
                report.warn("extract", format!("frame {} has no foreground; keypoints carried over", f + 1));
            }
            report.stage("extract", ms(t));
            Motion {
                traj: ex.trajectories,
                delays: seq.delays().to_vec(),
                loop_count: seq.loop_count(),
                size: Some((seq.width(), seq.height())),
            }
        }
        MotionInput::Trajectory(json) => {
            let t = Instant::now();
            let traj = import_trajectories(json).map_err(at("import"))?;
            report.stage("import", ms(t));
            Motion {
                delays: vec![DEFAULT_TRAJECTORY_DELAY; traj.f],
                traj,
                loop_count: LoopCount::Infinite,
                size: None,
            }
        }
    };
    apply_keypoint_edits(&mut motion.traj, &cfg.keypoint_edits).map_err(at("edit"))?;
    if let Some(d) = cfg.delay {
        motion.delays = vec![d; motion.traj.f];
    }
    Ok(motion)
}

fn ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

pub fn run_with_inputs(cfg: &PipelineConfig, inputs: &PipelineInputs, exec: Execution) -> Result<Artifacts, PipelineError> {
    let started = Instant::now();
    let problems = cfg.violations();
    if !problems.is_empty() {
        return Err(PipelineError::Config(problems));
    }
    let mut report = Report::default();
    let motion = motion_stage(cfg, &inputs.motion, &mut report)?;

    let t = Instant::now();
    let font = Font::parse(inputs.font.as_deref().unwrap_or(BUNDLED_FONT)).map_err(at("layout"))?;
    let canvas = cfg.canvas(motion.size);
    let params = cfg.deform_params();
    let spec = cfg.render_spec(canvas);

    let (controls, ctraj, positions) = match cfg.mode {
        Mode::Glyph => {
            let (layout, controls) = layout_text(&font, &cfg.text, canvas, cfg.margin).map_err(at("layout"))?;
            for w in &layout.warnings {
                report.warn("layout", w.clone());
            }
            report.stage("layout", ms(t));
            let c0 = controls.positions();
            let problems = params.violations(Some(c0.len()));
            if !problems.is_empty() {
                return Err(PipelineError::Config(problems));
            }

            let t = Instant::now();
            let mut ctraj = align_frames_with(exec, &c0, &motion.traj, params.e).map_err(at("align"))?;
            report.stage("align", ms(t));

            let t = Instant::now();
            let graph = build_neighbor_graph(&c0, params.k_neighbors).map_err(at("optimize"))?;
            let (optimized, frames) = optimize_all(exec, &ctraj.raw, &c0, &graph, &params).map_err(at("optimize"))?;
            report.stage("optimize", ms(t));
            report.records.extend(frames.into_iter().map(ReportRecord::Frame));

            let mut positions = optimized.clone();
            apply_control_edits(&mut positions, &cfg.control_edits).map_err(at("edit"))?;
            ctraj.optimized = Some(positions.clone());
            (controls, ctraj, positions)
        }
        Mode::Wordcloud => {
            let (placements, warnings) = if cfg.words.is_empty() {
                let words: Vec<&str> = cfg.text.split_whitespace().collect();
                spiral_layout(&font, &words, canvas).map_err(at("layout"))?
            } else {
                (cfg.words.clone(), Vec::new())
            };
            let cloud = build_word_cloud(&font, &placements, canvas).map_err(at("layout"))?;
            for w in warnings.iter().chain(&cloud.warnings) {
                report.warn("layout", w.clone());
            }
            report.stage("layout", ms(t));

            let t = Instant::now();
            let ctraj = align_frames_with(exec, &cloud.anchors(), &motion.traj, params.e).map_err(at("align"))?;
            report.stage("align", ms(t));
            let mut positions: Vec<Vec<Point>> = ctraj.raw.iter().map(|a| cloud.positions_for(a)).collect();
            apply_control_edits(&mut positions, &cfg.control_edits).map_err(at("edit"))?;
            (cloud.combined, ctraj, positions)
        }
    };

    let t = Instant::now();
    let frames =
        render_sequence(exec, &positions, &controls, &spec, &motion.delays, motion.loop_count).map_err(at("render"))?;
    report.stage("render", ms(t));

    let svg = if cfg.svg_dir.is_some() {
        let contours: Vec<_> = positions
            .iter()
            .map(|p| controls.contours_at(p).expect("render validated the shape"))
            .collect();
        Some(svg_bundle(&contours, &motion.delays, &spec))
    } else {
        None
    };

    let t = Instant::now();
    let gif = encode_gif(&frames).map_err(at("encode"))?;
    report.stage("encode", ms(t));

    let total_ms = ms(started);
    let ms_per_frame = total_ms / frames.len() as f64;
    report.records.push(ReportRecord::Summary {
        mode: format!("{:?}", cfg.mode).to_lowercase(),
        frames: frames.len(),
        keypoints: motion.traj.n,
        control_points: controls.total_points,
        total_ms,
        ms_per_frame,
        budget_ms_per_frame: FRAME_BUDGET_MS,
        within_budget: ms_per_frame <= FRAME_BUDGET_MS,
    });
    Ok(Artifacts {
        gif,
        frames,
        svg,
        report,
        trajectories: motion.traj,
        controls,
        control_trajectory: ctraj,
    })
}

fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".partial");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)
}

impl Artifacts {
    /// Writes the outputs named in `cfg`.
    pub fn write(&self, cfg: &PipelineConfig) -> io::Result<()> {
        if let Some(out) = &cfg.out {
            write_atomic(out, &self.gif)?;
        }
        if let (Some(dir), Some(svg)) = (&cfg.svg_dir, &self.svg) {
            svg.write_to(dir)?;
        }
        if let Some(path) = &cfg.report {
            write_atomic(path, self.report.to_ndjson().as_bytes())?;
        }
        Ok(())
    }
}
