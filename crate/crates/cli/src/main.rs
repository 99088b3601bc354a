use std::fs;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use glyphmotion::gif::{decode_gif, encode_gif};
use glyphmotion::motion::{export_trajectories, extract_keypoints, ExtractParams};
use glyphmotion::par::Execution;
use glyphmotion::pipeline::{load_inputs, run_with_inputs, PipelineConfig, PipelineError};
use glyphmotion::synth;
use serde_json::Value;

/// Kinetic typography from a driving GIF.
#[derive(Parser)]
#[command(name = "glyphmotion", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Animate text with the motion of a GIF or a trajectory file.
    Animate(Box<AnimateArgs>),
    /// Track keypoints in a GIF and write them as trajectory JSON.
    Extract(ExtractArgs),
    /// Write one of the synthetic test inputs.
    Synth(SynthArgs),
    /// Run the studio HTTP service.
    Serve(ServeArgs),
}

/// Flags override values from `--config`.
#[derive(Args, Default)]
struct AnimateArgs {
    /// JSON config with the same keys as these flags.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    text: Option<String>,
    /// TrueType font; the bundled font when omitted.
    #[arg(long)]
    font: Option<PathBuf>,
    #[arg(long)]
    gif: Option<PathBuf>,
    #[arg(long)]
    trajectory: Option<PathBuf>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    e: Option<f64>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    /// glyph or wordcloud
    #[arg(long)]
    mode: Option<String>,
    /// frozen or differentiated
    #[arg(long)]
    weight_mode: Option<String>,
    /// driving_gif or extracted_text
    #[arg(long)]
    source: Option<String>,
    #[arg(long)]
    width: Option<u32>,
    #[arg(long)]
    height: Option<u32>,
    #[arg(long)]
    fill: Option<String>,
    #[arg(long)]
    background: Option<String>,
    /// Frame delay override in centiseconds.
    #[arg(long)]
    delay: Option<u16>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    svg_dir: Option<PathBuf>,
    #[arg(long)]
    report: Option<PathBuf>,
    /// Accepted for compatibility. Every run is deterministic already.
    #[arg(long)]
    seedless: bool,
    /// Disable frame-level parallelism.
    #[arg(long)]
    sequential: bool,
}

#[derive(Args)]
struct ExtractArgs {
    #[arg(long)]
    gif: PathBuf,
    #[arg(long, default_value_t = ExtractParams::default().n)]
    n: usize,
    #[arg(long, default_value_t = ExtractParams::default().threshold)]
    threshold: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Scene {
    Bouncing,
    Squash,
    Translating,
    Static,
    /// Analytic keypoint trajectory, written as JSON.
    Wave,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, value_enum)]
    scene: Scene,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1:8080")]
    addr: SocketAddr,
    /// Persist sessions here and reload them on start.
    #[arg(long)]
    data_dir: Option<PathBuf>,
}

/// Failure classes map to exit codes 2 and 3.
enum Failure {
    Config(anyhow::Error),
    Stage(anyhow::Error),
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Config(_) => Failure::Config(e.into()),
            PipelineError::Stage { .. } => Failure::Stage(e.into()),
        }
    }
}

fn config_err(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Config(e.into())
}

fn stage_err(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Stage(e.into())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Animate(a) => animate(*a),
        Command::Extract(a) => extract(a),
        Command::Synth(a) => synth_cmd(a),
        Command::Serve(a) => serve(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Stage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(3)
        }
    }
}

/// Parses a lowercase enum name through the config schema.
fn enum_value<T: serde::de::DeserializeOwned>(flag: &str, v: &str) -> Result<T, Failure> {
    serde_json::from_value(Value::String(v.to_string())).map_err(|e| config_err(anyhow!("--{flag}: {e}")))
}

fn build_config(a: &AnimateArgs) -> Result<PipelineConfig, Failure> {
    let mut cfg = match &a.config {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display())).map_err(config_err)?;
            PipelineConfig::from_json(&text).map_err(|e| config_err(anyhow!("{}: {e}", path.display())))?
        }
        None => PipelineConfig::default(),
    };
    macro_rules! set {
        ($($field:ident),*) => { $( if let Some(v) = &a.$field { cfg.$field = v.clone(); } )* };
    }
    macro_rules! set_opt {
        ($($field:ident),*) => { $( if a.$field.is_some() { cfg.$field = a.$field.clone(); } )* };
    }
    set!(text, alpha, e, k, n, fill, background);
    set_opt!(font, gif, trajectory, width, height, delay, out, svg_dir, report);
    if let Some(m) = &a.mode {
        cfg.mode = enum_value("mode", m)?;
    }
    if let Some(m) = &a.weight_mode {
        cfg.weight_mode = enum_value("weight-mode", m)?;
    }
    if let Some(s) = &a.source {
        cfg.source = enum_value("source", s)?;
    }
    Ok(cfg)
}

fn animate(a: AnimateArgs) -> Result<(), Failure> {
    let cfg = build_config(&a)?;
    let mut problems = cfg.violations();
    if cfg.out.is_none() {
        problems.push("an output path is required: set out".into());
    }
    if !problems.is_empty() {
        return Err(PipelineError::Config(problems).into());
    }
    let exec = if a.sequential { Execution::Sequential } else { Execution::default() };
    let inputs = load_inputs(&cfg)?;
    let art = run_with_inputs(&cfg, &inputs, exec)?;
    for w in art.report.warnings() {
        log::warn!("{w}");
    }
    art.write(&cfg).context("write stage failed").map_err(stage_err)?;
    let ms = art.report.summary_ms_per_frame().unwrap_or(0.0);
    println!(
        "wrote {} ({} frames, {} control points, {ms:.1} ms/frame)",
        cfg.out.as_ref().expect("checked").display(),
        art.frames.len(),
        art.controls.total_points,
    );
    Ok(())
}

fn extract(a: ExtractArgs) -> Result<(), Failure> {
    let params = ExtractParams { n: a.n, threshold: a.threshold, ..ExtractParams::default() };
    if params.n == 0 {
        return Err(config_err(anyhow!("n must be >= 1")));
    }
    let bytes = fs::read(&a.gif).with_context(|| format!("load stage failed: {}", a.gif.display())).map_err(stage_err)?;
    let seq = decode_gif(&bytes).context("decode stage failed").map_err(stage_err)?;
    let ex = extract_keypoints(&seq, &params).context("extract stage failed").map_err(stage_err)?;
    for f in &ex.carried_frames {
        log::warn!("frame {} has no foreground; keypoints carried over", f + 1);
    }
    fs::write(&a.out, export_trajectories(&ex.trajectories))
        .with_context(|| format!("writing {}", a.out.display()))
        .map_err(stage_err)?;
    println!("wrote {} ({} keypoints x {} frames)", a.out.display(), ex.trajectories.n, ex.trajectories.f);
    Ok(())
}

fn synth_cmd(a: SynthArgs) -> Result<(), Failure> {
    let bytes = match a.scene {
        Scene::Wave => export_trajectories(&synth::wave_trajectory(10, synth::SCENE_FRAMES)).into_bytes(),
        scene => {
            let s = match scene {
                Scene::Bouncing => synth::bouncing_disk(),
                Scene::Squash => synth::squash_ball(),
                Scene::Translating => synth::translating_disk(synth::SCENE_FRAMES),
                _ => synth::static_disk(synth::SCENE_FRAMES),
            };
            encode_gif(&s.render()).context("encode stage failed").map_err(stage_err)?
        }
    };
    fs::write(&a.out, bytes).with_context(|| format!("writing {}", a.out.display())).map_err(stage_err)?;
    Ok(())
}

fn serve(a: ServeArgs) -> Result<(), Failure> {
    let state = match &a.data_dir {
        Some(dir) => glyphmotion_studio::AppState::with_data_dir(dir).map_err(config_err)?,
        None => glyphmotion_studio::AppState::in_memory(),
    };
    let rt = tokio::runtime::Runtime::new().context("starting runtime").map_err(stage_err)?;
    rt.block_on(glyphmotion_studio::serve(a.addr, state)).context("server stopped").map_err(stage_err)
}
