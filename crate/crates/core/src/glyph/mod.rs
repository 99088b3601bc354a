//! TrueType outlines, text layout and the flattened control-point set.

mod contour;
mod layout;
mod ttf;

pub use contour::GlyphContour;
pub use layout::{
    layout_text, layout_text_at, CanvasSpec, ContourSpan, GlyphControlSet, LayoutError,
    PlacedGlyph, TextLayout, CONTROL_SET_VERSION, DEFAULT_MARGIN, MIN_GLYPH_POINTS,
};
pub use ttf::{Font, FontError, GlyphLookup, Outline, RawContour};

/// The font bundled with the crate: a renamed Basic Latin subset of
/// DejaVu Sans (see `assets/LICENSE-font.txt`).
pub static BUNDLED_FONT: &[u8] = include_bytes!("../../assets/glyphmotion-test-sans.ttf");

/// Parses [`BUNDLED_FONT`].
pub fn bundled_font() -> Font {
    Font::parse(BUNDLED_FONT).expect("bundled font parses")
}
