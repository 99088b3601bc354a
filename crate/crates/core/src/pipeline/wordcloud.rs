//! Word-cloud mode: every word is a rigid unit driven through a single
//! anchor at the center of its outline.

use crate::geom::{Bounds, Point};
use crate::glyph::{layout_text_at, CanvasSpec, Font, GlyphControlSet, LayoutError};

use super::config::WordPlacement;

const SPIRAL_STEP: f64 = 0.1;
const SPIRAL_GROWTH: f64 = 0.004;
const SPIRAL_MAX_STEPS: usize = 4000;
const EDGE: f64 = 0.02;

#[derive(Clone, Debug)]
pub struct PlacedWord {
    pub placement: WordPlacement,
    pub controls: GlyphControlSet,
    pub bounds: Bounds,
    pub anchor: Point,
}

#[derive(Clone, Debug)]
pub struct WordCloud {
    pub words: Vec<PlacedWord>,
    /// All words' contours in one set, word by word.
    pub combined: GlyphControlSet,
    pub warnings: Vec<String>,
}

impl WordCloud {
    pub fn anchors(&self) -> Vec<Point> {
        self.words.iter().map(|w| w.anchor).collect()
    }

    /// Flattened control points with each word moved to its anchor position.
    pub fn positions_for(&self, anchors: &[Point]) -> Vec<Point> {
        self.words
            .iter()
            .zip(anchors)
            .flat_map(|(w, &a)| {
                let d = a - w.anchor;
                w.controls.positions().into_iter().map(move |p| p + d)
            })
            .collect()
    }
}

fn word_layout(font: &Font, p: &WordPlacement, canvas: CanvasSpec) -> Result<(GlyphControlSet, Bounds), LayoutError> {
    let (_, set) = layout_text_at(font, &p.word, canvas, Point::new(p.x, p.y), p.size)?;
    let bounds = Bounds::of(set.positions().iter()).ok_or(LayoutError::NoDrawableGlyphs)?;
    Ok((set, bounds))
}

fn inside(b: &Bounds) -> bool {
    b.min.x >= EDGE && b.min.y >= EDGE && b.max.x <= 1.0 - EDGE && b.max.y <= 1.0 - EDGE
}

/// Places words on an Archimedean spiral from the canvas center, largest
/// first, taking the first spot that neither leaves the canvas nor touches
/// an earlier word.
pub fn spiral_layout(font: &Font, words: &[&str], canvas: CanvasSpec) -> Result<(Vec<WordPlacement>, Vec<String>), LayoutError> {
    let n = words.len();
    let mut placed: Vec<Bounds> = Vec::new();
    let mut out = Vec::with_capacity(n);
    let mut warnings = Vec::new();
    for (i, word) in words.iter().enumerate() {
        let shrink = if n > 1 { i as f64 / (n - 1) as f64 } else { 0.0 };
        let size = canvas.height as f64 * 0.16 * (1.0 - 0.45 * shrink);
        let mut chosen = None;
        for s in 0..SPIRAL_MAX_STEPS {
            let t = s as f64 * SPIRAL_STEP;
            let r = SPIRAL_GROWTH * t;
            let p = WordPlacement {
                word: word.to_string(),
                x: 0.5 + r * t.cos(),
                y: 0.5 + r * t.sin(),
                size,
            };
            let (_, b) = word_layout(font, &p, canvas)?;
            if inside(&b) && !placed.iter().any(|o| o.intersects(&b)) {
                chosen = Some((p, b));
                break;
            }
        }
        let (p, b) = match chosen {
            Some(c) => c,
            None => {
                warnings.push(format!("no free spot for word {word:?}; placed at the center"));
                let p = WordPlacement { word: word.to_string(), x: 0.5, y: 0.5, size };
                let (_, b) = word_layout(font, &p, canvas)?;
                (p, b)
            }
        };
        placed.push(b);
        out.push(p);
    }
    Ok((out, warnings))
}

pub fn build_word_cloud(font: &Font, placements: &[WordPlacement], canvas: CanvasSpec) -> Result<WordCloud, LayoutError> {
    let mut words = Vec::with_capacity(placements.len());
    let mut warnings = Vec::new();
    let mut all = Vec::new();
    let mut glyph_offset = 0;
    for p in placements {
        let (controls, bounds) = word_layout(font, p, canvas)?;
        for (k, other) in words.iter().enumerate() {
            let other: &PlacedWord = other;
            if other.bounds.intersects(&bounds) {
                warnings.push(format!("word {:?} overlaps word {} ({:?})", p.word, k + 1, other.placement.word));
            }
        }
        let spans = &controls.glyph_index_map;
        for (span, contour) in spans.iter().zip(&controls.contours) {
            all.push((glyph_offset + span.glyph, span.ch, contour.clone()));
        }
        glyph_offset += spans.last().map_or(0, |s| s.glyph + 1);
        words.push(PlacedWord {
            placement: p.clone(),
            anchor: bounds.center(),
            controls,
            bounds,
        });
    }
    Ok(WordCloud {
        words,
        combined: GlyphControlSet::from_contours(canvas, all),
        warnings,
    })
}
