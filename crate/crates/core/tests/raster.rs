//! Rendering checks on real glyph outlines.

use glyphmotion::frame::LoopCount;
use glyphmotion::geom::Point;
use glyphmotion::glyph::{bundled_font, layout_text, CanvasSpec};
use glyphmotion::par::Execution;
use glyphmotion::raster::{render_frame, render_frame_with_rule, render_sequence, FillRule, RenderError, RenderSpec};

#[test]
fn letters_with_counters_fill_the_same_under_both_rules() {
    // Outer and inner TrueType contours wind in opposite directions, so the
    // winding number is only ever 0 or 1 and both rules must agree. A hole
    // filled in means the orientation handling is broken.
    let font = bundled_font();
    let spec = RenderSpec { width: 96, height: 96, ..RenderSpec::default() };
    let mut checked = 0;
    for ch in ('!'..='~').chain("éÅåü".chars()) {
        let gid = font.glyph_id(ch).unwrap();
        if font.outline(gid).unwrap().contours.len() < 2 {
            continue;
        }
        let (_, set) = layout_text(&font, &ch.to_string(), CanvasSpec::new(96, 96), 0.1).unwrap();
        let nz = render_frame(&set.contours, &spec).unwrap();
        let eo = render_frame_with_rule(&set.contours, &spec, FillRule::EvenOdd).unwrap();
        assert_eq!(nz.diff_count(&eo), 0, "{ch:?}");
        checked += 1;
    }
    assert!(checked >= 15, "only {checked} letters with holes");
}

#[test]
fn o_has_a_hole() {
    let font = bundled_font();
    let (_, set) = layout_text(&font, "o", CanvasSpec::new(64, 64), 0.1).unwrap();
    let img = render_frame(&set.contours, &RenderSpec { width: 64, height: 64, ..RenderSpec::default() }).unwrap();
    assert_eq!(img.get(32, 32), glyphmotion::frame::Rgba::WHITE);
}

#[test]
fn identity_trajectory_repeats_the_static_frame() {
    let font = bundled_font();
    let (_, set) = layout_text(&font, "wakey", CanvasSpec::new(128, 128), 0.1).unwrap();
    let spec = RenderSpec { width: 128, height: 128, ..RenderSpec::default() };
    let still = render_frame(&set.contours, &spec).unwrap();
    let positions = vec![set.positions(); 5];
    let seq = render_sequence(Execution::default(), &positions, &set, &spec, &[4; 5], LoopCount::Infinite).unwrap();
    assert!(seq.frames().iter().all(|f| *f == still));
}

#[test]
fn whole_pixel_shift_moves_the_raster() {
    let font = bundled_font();
    let (_, set) = layout_text(&font, "UIST", CanvasSpec::new(128, 128), 0.2).unwrap();
    let spec = RenderSpec { width: 128, height: 128, supersample: 1, ..RenderSpec::default() };
    let dx = 5;
    let moved: Vec<Point> = set.positions().iter().map(|p| Point::new(p.x + dx as f64 / 128.0, p.y)).collect();
    let a = render_frame(&set.contours, &spec).unwrap();
    let b = render_frame(&set.contours_at(&moved).unwrap(), &spec).unwrap();
    for y in 0..128 {
        for x in dx..128 {
            assert_eq!(b.get(x, y), a.get(x - dx, y), "({x}, {y})");
        }
    }
}

#[test]
fn parallel_render_is_bit_identical() {
    let font = bundled_font();
    let (_, set) = layout_text(&font, "sleepy", CanvasSpec::default(), 0.1).unwrap();
    let base = set.positions();
    let positions: Vec<Vec<Point>> = (0..8)
        .map(|f| base.iter().map(|p| Point::new(p.x + 0.003 * f as f64, p.y - 0.002 * f as f64)).collect())
        .collect();
    let spec = RenderSpec::default();
    let a = render_sequence(Execution::Sequential, &positions, &set, &spec, &[5; 8], LoopCount::Infinite).unwrap();
    let b = render_sequence(Execution::Parallel, &positions, &set, &spec, &[5; 8], LoopCount::Infinite).unwrap();
    assert_eq!(a.frames(), b.frames());
}

#[test]
fn point_count_mismatch_is_an_error() {
    let font = bundled_font();
    let (_, set) = layout_text(&font, "a", CanvasSpec::default(), 0.1).unwrap();
    let short = vec![set.positions()[1..].to_vec()];
    let err = render_sequence(Execution::Sequential, &short, &set, &RenderSpec::default(), &[5], LoopCount::Infinite)
        .unwrap_err();
    assert!(matches!(err, RenderError::PointCount { frame: 1, .. }));
}
