//! Sequential vs parallel execution of the per-frame stages.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use glyphmotion::align::align_frames_with;
use glyphmotion::deform::DeformParams;
use glyphmotion::frame::LoopCount;
use glyphmotion::geom::Point;
use glyphmotion::glyph::{bundled_font, layout_text, CanvasSpec, GlyphControlSet};
use glyphmotion::laplace::{build_neighbor_graph, optimize_all};
use glyphmotion::motion::{extract_keypoints, ExtractParams, KeypointTrajectorySet};
use glyphmotion::par::Execution;
use glyphmotion::raster::{render_sequence, RenderSpec};
use glyphmotion::synth;

struct Scene {
    controls: GlyphControlSet,
    c0: Vec<Point>,
    traj: KeypointTrajectorySet,
    raw: Vec<Vec<Point>>,
}

fn scene() -> Scene {
    let font = bundled_font();
    let (_, controls) = layout_text(&font, "kinetic", CanvasSpec::new(256, 256), 0.1).unwrap();
    let traj = extract_keypoints(&synth::squash_ball().render(), &ExtractParams::default())
        .unwrap()
        .trajectories;
    let c0 = controls.positions();
    let raw = align_frames_with(Execution::Sequential, &c0, &traj, 2.0).unwrap().raw;
    Scene { controls, c0, traj, raw }
}

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn bench_align(c: &mut Criterion) {
    let s = scene();
    let mut g = c.benchmark_group("align");
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| align_frames_with(exec, black_box(&s.c0), &s.traj, 2.0).unwrap())
        });
    }
    g.finish();
}

fn bench_optimize(c: &mut Criterion) {
    let s = scene();
    let graph = build_neighbor_graph(&s.c0, 3).unwrap();
    let params = DeformParams::default();
    let mut g = c.benchmark_group("optimize");
    g.sample_size(20);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| optimize_all(exec, black_box(&s.raw), &s.c0, &graph, &params).unwrap())
        });
    }
    g.finish();
}

fn bench_render(c: &mut Criterion) {
    let s = scene();
    let spec = RenderSpec::default();
    let delays = vec![8; s.raw.len()];
    let mut g = c.benchmark_group("render");
    g.sample_size(20);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| render_sequence(exec, black_box(&s.raw), &s.controls, &spec, &delays, LoopCount::Infinite).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, bench_align, bench_optimize, bench_render);
criterion_main!(benches);
