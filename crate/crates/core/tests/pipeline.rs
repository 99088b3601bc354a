//! End-to-end runs on the bundled fixtures.

use glyphmotion::align::align_frames;
use glyphmotion::geom::Point;
use glyphmotion::gif::decode_gif;
use glyphmotion::glyph::{bundled_font, layout_text, CanvasSpec};
use glyphmotion::motion::{export_trajectories, KeypointTrajectorySet, TrajectorySource};
use glyphmotion::par::Execution;
use glyphmotion::pipeline::{
    run_with_inputs, Mode, MotionInput, PipelineConfig, PipelineError, PipelineInputs, ReportRecord, WordPlacement,
};
use glyphmotion::raster::render_frame;

mod common;

fn gif_inputs(name: &str) -> PipelineInputs {
    PipelineInputs { font: None, motion: MotionInput::Gif(common::fixture(name)) }
}

fn config(text: &str) -> PipelineConfig {
    PipelineConfig { text: text.into(), gif: Some("fixture.gif".into()), ..PipelineConfig::default() }
}

#[test]
fn static_gif_reproduces_the_static_render() {
    let cfg = config("wakey");
    let art = run_with_inputs(&cfg, &gif_inputs("static_disk.gif"), Execution::default()).unwrap();
    let font = bundled_font();
    let (_, set) = layout_text(&font, "wakey", CanvasSpec::new(256, 256), 0.1).unwrap();
    let still = render_frame(&set.contours, &cfg.render_spec(CanvasSpec::new(256, 256))).unwrap();
    let decoded = decode_gif(&art.gif).unwrap();
    assert_eq!(decoded.len(), 8);
    for f in decoded.frames() {
        assert_eq!(f.diff_count(&still), 0);
    }
}

#[test]
fn uist_on_bouncing_disk_matches_golden_frames() {
    let art = run_with_inputs(&config("UIST"), &gif_inputs("bouncing_disk.gif"), Execution::default()).unwrap();
    if std::env::var_os("GLYPHMOTION_REGEN_FIXTURES").is_some() {
        common::write_fixture("uist_bouncing_golden.gif", &art.gif);
    }
    let golden = decode_gif(&common::fixture("uist_bouncing_golden.gif")).unwrap();
    assert_eq!(golden.len(), art.frames.len());
    for (f, (a, b)) in golden.frames().iter().zip(art.frames.frames()).enumerate() {
        assert_eq!(a.as_bytes(), b.as_bytes(), "frame {}", f + 1);
    }
}

#[test]
fn runs_are_byte_identical() {
    let a = run_with_inputs(&config("sleepy"), &gif_inputs("squash_ball.gif"), Execution::Parallel).unwrap();
    let b = run_with_inputs(&config("sleepy"), &gif_inputs("squash_ball.gif"), Execution::Sequential).unwrap();
    assert_eq!(a.gif, b.gif);
}

#[test]
fn report_has_stages_frames_and_summary() {
    let art = run_with_inputs(&config("sleepy"), &gif_inputs("bouncing_disk.gif"), Execution::default()).unwrap();
    let r = &art.report;
    for stage in ["decode", "extract", "layout", "align", "optimize", "render", "encode"] {
        assert!(r.stage_ms(stage).is_some(), "{stage}");
    }
    assert_eq!(r.frames().count(), 16);
    assert!(r.summary_ms_per_frame().unwrap() > 0.0);
    assert!(r.warnings().any(|w| w.contains("'l'")));
    for line in r.to_ndjson().lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert!(v["type"].is_string());
    }
}

#[test]
fn stage_outputs_feed_back_in() {
    // extracted keypoints exported to a file drive the same result
    let cfg = config("UIST");
    let full = run_with_inputs(&cfg, &gif_inputs("bouncing_disk.gif"), Execution::default()).unwrap();
    let json = export_trajectories(&full.trajectories);
    let cfg2 = PipelineConfig {
        gif: None,
        trajectory: Some("t.json".into()),
        delay: Some(full.frames.delays()[0]),
        ..cfg
    };
    let inputs = PipelineInputs { font: None, motion: MotionInput::Trajectory(json) };
    let replay = run_with_inputs(&cfg2, &inputs, Execution::default()).unwrap();
    assert_eq!(replay.gif, full.gif);
}

#[test]
fn imported_wave_trajectory_drives_the_pipeline() {
    let json = String::from_utf8(common::fixture("wave_trajectory.json")).unwrap();
    let cfg = PipelineConfig { gif: None, trajectory: Some("wave.json".into()), ..config("wave") };
    let art = run_with_inputs(&cfg, &PipelineInputs { font: None, motion: MotionInput::Trajectory(json) }, Execution::default())
        .unwrap();
    assert_eq!(art.frames.len(), 16);
    assert_eq!(art.trajectories.source, TrajectorySource::Imported);
    assert_ne!(art.frames.frames()[0], art.frames.frames()[4]);
}

#[test]
fn bundled_wave_fixture_matches_generator() {
    let want = export_trajectories(&glyphmotion::synth::wave_trajectory(10, 16));
    if std::env::var_os("GLYPHMOTION_REGEN_FIXTURES").is_some() {
        common::write_fixture("wave_trajectory.json", want.as_bytes());
    }
    assert_eq!(String::from_utf8(common::fixture("wave_trajectory.json")).unwrap(), want);
}

#[test]
fn stage_errors_name_the_stage() {
    let bad = PipelineInputs { font: None, motion: MotionInput::Gif(b"GIF89a\x01".to_vec()) };
    let err = run_with_inputs(&config("a"), &bad, Execution::default()).unwrap_err();
    assert_eq!(err.stage(), Some("decode"));
    assert!(err.to_string().starts_with("decode stage failed"), "{err}");

    let bad_font = PipelineInputs { font: Some(vec![0; 40]), ..gif_inputs("static_disk.gif") };
    let err = run_with_inputs(&config("a"), &bad_font, Execution::default()).unwrap_err();
    assert_eq!(err.stage(), Some("layout"));

    let err = run_with_inputs(&config("   "), &gif_inputs("static_disk.gif"), Execution::default()).unwrap_err();
    assert!(matches!(err, PipelineError::Config(_)));
}

#[test]
fn k_must_be_below_point_count() {
    let cfg = PipelineConfig { k: 500, ..config("l") };
    let err = run_with_inputs(&cfg, &gif_inputs("static_disk.gif"), Execution::default()).unwrap_err();
    match err {
        PipelineError::Config(v) => assert!(v[0].contains("k_neighbors"), "{v:?}"),
        other => panic!("{other}"),
    }
}

#[test]
fn control_edit_changes_only_its_frame() {
    let base = run_with_inputs(&config("UIST"), &gif_inputs("bouncing_disk.gif"), Execution::default()).unwrap();
    let opt = base.control_trajectory.optimized.as_ref().unwrap();
    let p = opt[4][9];
    let edit = glyphmotion::pipeline::ControlEdit { j: 10, f: 5, x: p.x + 0.04, y: p.y };
    let cfg = PipelineConfig { control_edits: vec![edit], ..config("UIST") };
    let edited = run_with_inputs(&cfg, &gif_inputs("bouncing_disk.gif"), Execution::default()).unwrap();
    for (f, (a, b)) in base.frames.frames().iter().zip(edited.frames.frames()).enumerate() {
        if f == 4 {
            assert!(a.diff_count(b) > 0);
        } else {
            assert_eq!(a.diff_count(b), 0, "frame {}", f + 1);
        }
    }
}

// -- word clouds --

const CLOUD: &str = "kinetic type moves with every bounce of the ball and feels alive";

fn cloud_config(text: &str) -> PipelineConfig {
    PipelineConfig { mode: Mode::Wordcloud, ..config(text) }
}

#[test]
fn twelve_word_cloud_anchors_follow_alignment() {
    assert_eq!(CLOUD.split_whitespace().count(), 12);
    let art = run_with_inputs(&cloud_config(CLOUD), &gif_inputs("bouncing_disk.gif"), Execution::default()).unwrap();
    assert_eq!(art.control_trajectory.m, 12);
    let anchors = art.control_trajectory.raw[0].clone();
    let direct = align_frames(&anchors, &art.trajectories, 2.0).unwrap();
    assert_eq!(direct.raw, art.control_trajectory.raw);
    assert!(art.control_trajectory.optimized.is_none());
    assert_eq!(art.report.frames().count(), 0);
}

#[test]
fn single_word_moves_by_its_anchor_displacement() {
    let words = vec![WordPlacement { word: "hop".into(), x: 0.5, y: 0.3, size: 48.0 }];
    let cfg = PipelineConfig { words, ..cloud_config("") };
    let art = run_with_inputs(&cfg, &gif_inputs("bouncing_disk.gif"), Execution::default()).unwrap();
    let traj = &art.trajectories;
    let a0 = art.control_trajectory.raw[0][0];
    let w = glyphmotion::align::interpolation_weights(a0, &traj.frame(0), 2.0);
    for f in 1..traj.f {
        let mut d = Point::ZERO;
        for (i, wi) in w.iter().enumerate() {
            d += (traj.get(i, f) - traj.get(i, 0)) * *wi;
        }
        assert!((art.control_trajectory.raw[f][0] - a0 - d).norm() < 1e-12);
    }
}

#[test]
fn uniform_motion_translates_the_whole_cloud() {
    let base: Vec<Point> = (0..10).map(|i| Point::new(0.3 + 0.04 * i as f64, 0.5)).collect();
    let d = Point::new(0.05, 0.02);
    let traj = KeypointTrajectorySet::from_frames(
        &[base.clone(), base.iter().map(|&p| p + d).collect()],
        TrajectorySource::Imported,
    )
    .unwrap();
    let cfg = PipelineConfig { gif: None, trajectory: Some("t.json".into()), ..cloud_config("one two three") };
    let inputs = PipelineInputs { font: None, motion: MotionInput::Trajectory(export_trajectories(&traj)) };
    let art = run_with_inputs(&cfg, &inputs, Execution::default()).unwrap();
    for (a, b) in art.control_trajectory.raw[1].iter().zip(&art.control_trajectory.raw[0]) {
        assert!((*a - *b - d).norm() < 1e-12);
    }
}

#[test]
fn overlapping_words_warn() {
    let p = |w: &str| WordPlacement { word: w.into(), x: 0.5, y: 0.5, size: 40.0 };
    let cfg = PipelineConfig { words: vec![p("same"), p("spot")], ..cloud_config("") };
    let art = run_with_inputs(&cfg, &gif_inputs("static_disk.gif"), Execution::default()).unwrap();
    assert!(art.report.records.iter().any(|r| matches!(r, ReportRecord::Warning { message, .. } if message.contains("overlaps"))));
}
