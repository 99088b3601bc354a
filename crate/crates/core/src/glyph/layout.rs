//! Horizontal text layout and normalization of control points into canvas
//! coordinates.
//!
//! Canvas coordinates are normalized to `[0, 1]²` with the origin at the
//! top-left corner and y pointing down, matching raster row order.

use std::ops::Range;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::contour::GlyphContour;
use super::ttf::{Font, FontError};
use crate::geom::{Bounds, Point};

/// Schema version of the serialized [`GlyphControlSet`].
pub const CONTROL_SET_VERSION: u32 = 1;

/// Glyphs with fewer control points than this are accepted with a warning;
/// very sparse outlines deform poorly.
pub const MIN_GLYPH_POINTS: usize = 5;

pub const DEFAULT_MARGIN: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CanvasSpec {
    pub width: u32,
    pub height: u32,
}

impl CanvasSpec {
    pub const fn new(width: u32, height: u32) -> CanvasSpec {
        CanvasSpec { width, height }
    }
}

impl Default for CanvasSpec {
    fn default() -> Self {
        CanvasSpec::new(256, 256)
    }
}

#[derive(Debug, Error)]
pub enum LayoutError {
    #[error("no drawable glyphs")]
    NoDrawableGlyphs,
    #[error("canvas must have positive size, got {0}x{1}")]
    EmptyCanvas(u32, u32),
    #[error("margin {0} must be in [0, 0.5)")]
    BadMargin(f64),
    #[error(transparent)]
    Font(#[from] FontError),
}

/// Placement of one character in font units.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlacedGlyph {
    pub ch: char,
    pub glyph_id: u16,
    /// Pen position along the baseline, font units.
    pub pen_x: f64,
    pub advance: f64,
    pub baseline_offset: f64,
    /// True if the font had no mapping and `.notdef` was used.
    pub missing: bool,
}

/// Where the laid-out text sits on the canvas.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TextLayout {
    pub text: String,
    pub font: String,
    pub canvas: CanvasSpec,
    pub glyphs: Vec<PlacedGlyph>,
    /// Pixels per font unit.
    pub scale: f64,
    /// Pixel position of the font-space origin.
    pub translate: Point,
    pub warnings: Vec<String>,
}

impl TextLayout {
    /// Maps a font-space point (y up) to normalized canvas space (y down).
    pub fn to_canvas(&self, p: Point) -> Point {
        to_canvas(self.canvas, self.scale, self.translate, p)
    }
}

fn to_canvas(canvas: CanvasSpec, scale: f64, translate: Point, p: Point) -> Point {
    Point::new(
        (translate.x + scale * p.x) / canvas.width as f64,
        (translate.y - scale * p.y) / canvas.height as f64,
    )
}

/// Which flattened point range belongs to which glyph and contour.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContourSpan {
    /// Index into [`TextLayout::glyphs`].
    pub glyph: usize,
    pub ch: char,
    pub start: usize,
    pub len: usize,
}

impl ContourSpan {
    pub fn range(&self) -> Range<usize> {
        self.start..self.start + self.len
    }
}

/// The initial control points of a text, flattened in a stable order:
/// glyph by glyph, contour by contour, point by point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GlyphControlSet {
    pub version: u32,
    pub canvas: CanvasSpec,
    pub contours: Vec<GlyphContour>,
    pub glyph_index_map: Vec<ContourSpan>,
    pub total_points: usize,
}

impl GlyphControlSet {
    pub fn from_contours(canvas: CanvasSpec, contours: Vec<(usize, char, GlyphContour)>) -> GlyphControlSet {
        let mut spans = Vec::with_capacity(contours.len());
        let mut out = Vec::with_capacity(contours.len());
        let mut start = 0;
        for (glyph, ch, c) in contours {
            spans.push(ContourSpan {
                glyph,
                ch,
                start,
                len: c.len(),
            });
            start += c.len();
            out.push(c);
        }
        GlyphControlSet {
            version: CONTROL_SET_VERSION,
            canvas,
            contours: out,
            glyph_index_map: spans,
            total_points: start,
        }
    }

    /// The flattened initial positions `C⁰`.
    pub fn positions(&self) -> Vec<Point> {
        self.contours
            .iter()
            .flat_map(|c| c.points.iter().copied())
            .collect()
    }

    pub fn on_curve_flags(&self) -> Vec<bool> {
        self.contours
            .iter()
            .flat_map(|c| c.on_curve.iter().copied())
            .collect()
    }

    /// Rebuilds contours from a flattened position list of length `M`.
    pub fn contours_at(&self, positions: &[Point]) -> Option<Vec<GlyphContour>> {
        if positions.len() != self.total_points {
            return None;
        }
        Some(
            self.glyph_index_map
                .iter()
                .zip(&self.contours)
                .map(|(span, c)| GlyphContour {
                    points: positions[span.range()].to_vec(),
                    on_curve: c.on_curve.clone(),
                })
                .collect(),
        )
    }

    /// Location of flattened point `j` as (contour index, index in contour).
    pub fn locate(&self, j: usize) -> Option<(usize, usize)> {
        let k = self.glyph_index_map.partition_point(|s| s.start + s.len <= j);
        let span = self.glyph_index_map.get(k)?;
        span.range().contains(&j).then(|| (k, j - span.start))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("control set serializes")
    }
}

/// Per-glyph outlines in font units, positioned along the baseline.
struct ShapedText {
    glyphs: Vec<PlacedGlyph>,
    contours: Vec<(usize, char, GlyphContour)>,
    warnings: Vec<String>,
}

fn shape(font: &Font, text: &str) -> Result<ShapedText, LayoutError> {
    let mut pen = 0.0;
    let mut glyphs = Vec::new();
    let mut contours = Vec::new();
    let mut warnings = Vec::new();
    for ch in text.chars() {
        let lookup = font.lookup(ch);
        if lookup.missing {
            warnings.push(format!("no glyph for {ch:?}; using .notdef"));
        }
        let advance = font.advance(lookup.glyph_id) as f64;
        let outline = font.outline(lookup.glyph_id)?;
        let index = glyphs.len();
        let mut glyph_points = 0;
        for raw in outline.contours {
            let c = GlyphContour::new(raw.points, raw.on_curve).explicitize();
            if c.len() < 3 {
                warnings.push(format!("dropped degenerate contour in {ch:?}"));
                continue;
            }
            glyph_points += c.len();
            contours.push((index, ch, c.translated(Point::new(pen, 0.0))));
        }
        if glyph_points > 0 && glyph_points < MIN_GLYPH_POINTS {
            let msg = format!(
                "glyph {ch:?} has only {glyph_points} control points; deformation may look rigid"
            );
            log::warn!("{msg}");
            warnings.push(msg);
        }
        glyphs.push(PlacedGlyph {
            ch,
            glyph_id: lookup.glyph_id,
            pen_x: pen,
            advance,
            baseline_offset: 0.0,
            missing: lookup.missing,
        });
        pen += advance;
    }
    if contours.is_empty() {
        return Err(LayoutError::NoDrawableGlyphs);
    }
    Ok(ShapedText {
        glyphs,
        contours,
        warnings,
    })
}

fn check_inputs(text: &str, canvas: CanvasSpec) -> Result<(), LayoutError> {
    if canvas.width == 0 || canvas.height == 0 {
        return Err(LayoutError::EmptyCanvas(canvas.width, canvas.height));
    }
    if text.trim().is_empty() {
        return Err(LayoutError::NoDrawableGlyphs);
    }
    Ok(())
}

fn finish(
    font: &Font,
    text: &str,
    canvas: CanvasSpec,
    shaped: ShapedText,
    scale: f64,
    translate: Point,
) -> (TextLayout, GlyphControlSet) {
    let contours = shaped
        .contours
        .into_iter()
        .map(|(g, ch, c)| {
            let points = c
                .points
                .iter()
                .map(|&p| to_canvas(canvas, scale, translate, p))
                .collect();
            (g, ch, GlyphContour::new(points, c.on_curve))
        })
        .collect();
    let layout = TextLayout {
        text: text.to_string(),
        font: font.family_name().unwrap_or("unknown").to_string(),
        canvas,
        glyphs: shaped.glyphs,
        scale,
        translate,
        warnings: shaped.warnings,
    };
    (layout, GlyphControlSet::from_contours(canvas, contours))
}

/// Lays `text` out left to right and scales it uniformly so its outline
/// bounding box is centered on the canvas with `margin` (a fraction of the
/// canvas size) left free on every side.
pub fn layout_text(
    font: &Font,
    text: &str,
    canvas: CanvasSpec,
    margin: f64,
) -> Result<(TextLayout, GlyphControlSet), LayoutError> {
    check_inputs(text, canvas)?;
    if !(0.0..0.5).contains(&margin) {
        return Err(LayoutError::BadMargin(margin));
    }
    let shaped = shape(font, text)?;
    let bounds = Bounds::of(shaped.contours.iter().flat_map(|(_, _, c)| c.points.iter()))
        .ok_or(LayoutError::NoDrawableGlyphs)?;
    let avail_w = (1.0 - 2.0 * margin) * canvas.width as f64;
    let avail_h = (1.0 - 2.0 * margin) * canvas.height as f64;
    let sx = if bounds.width() > 0.0 { avail_w / bounds.width() } else { f64::INFINITY };
    let sy = if bounds.height() > 0.0 { avail_h / bounds.height() } else { f64::INFINITY };
    let scale = sx.min(sy);
    if !scale.is_finite() {
        return Err(LayoutError::NoDrawableGlyphs);
    }
    let c = bounds.center();
    let translate = Point::new(
        canvas.width as f64 / 2.0 - scale * c.x,
        canvas.height as f64 / 2.0 + scale * c.y,
    );
    Ok(finish(font, text, canvas, shaped, scale, translate))
}

/// Lays `text` out at a fixed size: the outline bounding box is centered on
/// `center` (normalized canvas coordinates) and the em square is
/// `em_px` pixels tall.
pub fn layout_text_at(
    font: &Font,
    text: &str,
    canvas: CanvasSpec,
    center: Point,
    em_px: f64,
) -> Result<(TextLayout, GlyphControlSet), LayoutError> {
    check_inputs(text, canvas)?;
    let shaped = shape(font, text)?;
    let bounds = Bounds::of(shaped.contours.iter().flat_map(|(_, _, c)| c.points.iter()))
        .ok_or(LayoutError::NoDrawableGlyphs)?;
    let scale = em_px / font.units_per_em() as f64;
    let c = bounds.center();
    let translate = Point::new(
        center.x * canvas.width as f64 - scale * c.x,
        center.y * canvas.height as f64 + scale * c.y,
    );
    Ok(finish(font, text, canvas, shaped, scale, translate))
}
