//! Glyph contour rendering and vector export.

mod fill;
mod flatten;
mod render;
mod svg;

pub use fill::{coverage, FillRule};
pub use flatten::{flatten_contour, quad_deviation};
pub use render::{
    contour_polylines, render_frame, render_frame_with_rule, render_sequence, RenderError, RenderSpec,
};
pub use svg::{contour_path, frame_svg, svg_bundle, ManifestFrame, SvgBundle, SvgManifest, MANIFEST_VERSION};
