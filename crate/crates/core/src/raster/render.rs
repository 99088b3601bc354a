use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::fill::{coverage, FillRule};
use super::flatten::flatten_contour;
use crate::frame::{FrameError, FrameSequence, LoopCount, Raster, Rgba};
use crate::geom::Point;
use crate::glyph::{GlyphContour, GlyphControlSet};
use crate::par::{self, Execution};

#[derive(Debug, Error, PartialEq)]
pub enum RenderError {
    #[error("render size must be positive (got {0}x{1})")]
    EmptyCanvas(u32, u32),
    #[error("supersample factor must be 1, 2 or 4 (got {0})")]
    Supersample(u32),
    #[error("flattening tolerance must be > 0 (got {0})")]
    Tolerance(f64),
    #[error("frame {frame} has {found} control points, the glyph set has {expected}")]
    PointCount { frame: usize, found: usize, expected: usize },
    #[error(transparent)]
    Frames(#[from] FrameError),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RenderSpec {
    pub width: u32,
    pub height: u32,
    pub background: Rgba,
    pub fill: Rgba,
    pub supersample: u32,
    /// Bezier flattening tolerance in output pixels.
    pub tolerance: f64,
}

impl Default for RenderSpec {
    fn default() -> Self {
        RenderSpec {
            width: 256,
            height: 256,
            background: Rgba::WHITE,
            fill: Rgba::BLACK,
            supersample: 4,
            tolerance: 0.25,
        }
    }
}

impl RenderSpec {
    pub fn validate(&self) -> Result<(), RenderError> {
        if self.width == 0 || self.height == 0 {
            return Err(RenderError::EmptyCanvas(self.width, self.height));
        }
        if ![1, 2, 4].contains(&self.supersample) {
            return Err(RenderError::Supersample(self.supersample));
        }
        if !(self.tolerance.is_finite() && self.tolerance > 0.0) {
            return Err(RenderError::Tolerance(self.tolerance));
        }
        Ok(())
    }
}

/// Pixel-space polylines for normalized contours.
pub fn contour_polylines(contours: &[GlyphContour], spec: &RenderSpec) -> Vec<Vec<Point>> {
    let (w, h) = (spec.width as f64, spec.height as f64);
    contours
        .iter()
        .map(|c| {
            let px = GlyphContour {
                points: c.points.iter().map(|p| Point::new(p.x * w, p.y * h)).collect(),
                on_curve: c.on_curve.clone(),
            };
            flatten_contour(&px, spec.tolerance)
        })
        .collect()
}

pub fn render_frame_with_rule(contours: &[GlyphContour], spec: &RenderSpec, rule: FillRule) -> Result<Raster, RenderError> {
    spec.validate()?;
    let polys = contour_polylines(contours, spec);
    let cov = coverage(&polys, spec.width, spec.height, spec.supersample, rule);
    let n = spec.supersample * spec.supersample;
    let (bg, fg) = (spec.background.0, spec.fill.0);
    let mut data = Vec::with_capacity(cov.len() * 4);
    for &c in &cov {
        let c = c as u32;
        for ch in 0..4 {
            let v = (bg[ch] as u32 * (n - c) + fg[ch] as u32 * c + n / 2) / n;
            data.push(v as u8);
        }
    }
    Ok(Raster::from_rgba(spec.width, spec.height, data).expect("buffer matches size"))
}

/// Nonzero-winding render of normalized contours.
pub fn render_frame(contours: &[GlyphContour], spec: &RenderSpec) -> Result<Raster, RenderError> {
    render_frame_with_rule(contours, spec, FillRule::NonZero)
}

/// Renders `positions[f]` (one flat control point list per frame).
pub fn render_sequence(
    exec: Execution,
    positions: &[Vec<Point>],
    controls: &GlyphControlSet,
    spec: &RenderSpec,
    delays: &[u16],
    loop_count: LoopCount,
) -> Result<FrameSequence, RenderError> {
    spec.validate()?;
    let frames = par::try_map_indexed(exec, positions.len(), |f| {
        let contours = controls.contours_at(&positions[f]).ok_or(RenderError::PointCount {
            frame: f + 1,
            found: positions[f].len(),
            expected: controls.total_points,
        })?;
        render_frame(&contours, spec)
    })?;
    Ok(FrameSequence::new(frames, delays.to_vec(), loop_count)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square(x0: f64, y0: f64, x1: f64, y1: f64) -> GlyphContour {
        GlyphContour::polygon(vec![Point::new(x0, y0), Point::new(x1, y0), Point::new(x1, y1), Point::new(x0, y1)])
    }

    #[test]
    fn empty_list_is_background() {
        let spec = RenderSpec { width: 8, height: 6, ..RenderSpec::default() };
        assert_eq!(render_frame(&[], &spec).unwrap(), Raster::filled(8, 6, Rgba::WHITE));
    }

    #[test]
    fn full_canvas_square() {
        let spec = RenderSpec { width: 10, height: 10, ..RenderSpec::default() };
        assert_eq!(render_frame(&[square(0.0, 0.0, 1.0, 1.0)], &spec).unwrap(), Raster::filled(10, 10, Rgba::BLACK));
    }

    #[test]
    fn counter_is_background() {
        let spec = RenderSpec { width: 20, height: 20, ..RenderSpec::default() };
        let mut inner = square(0.3, 0.3, 0.7, 0.7);
        inner.points.reverse();
        let img = render_frame(&[square(0.1, 0.1, 0.9, 0.9), inner], &spec).unwrap();
        assert_eq!(img.get(10, 10), Rgba::WHITE);
        assert_eq!(img.get(4, 4), Rgba::BLACK);
    }

    #[test]
    fn partial_coverage_blends() {
        let spec = RenderSpec { width: 2, height: 1, ..RenderSpec::default() };
        let img = render_frame(&[square(0.0, 0.0, 0.75, 1.0)], &spec).unwrap();
        assert_eq!(img.get(0, 0), Rgba::BLACK);
        assert_eq!(img.get(1, 0), Rgba([128, 128, 128, 255]));
    }

    #[test]
    fn spec_validation() {
        let bad = RenderSpec { supersample: 3, ..RenderSpec::default() };
        assert_eq!(bad.validate(), Err(RenderError::Supersample(3)));
        let bad = RenderSpec { width: 0, ..RenderSpec::default() };
        assert_eq!(bad.validate(), Err(RenderError::EmptyCanvas(0, 256)));
    }
}
