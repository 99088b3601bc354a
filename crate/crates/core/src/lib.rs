//! Motion transfer from a driving GIF onto the control points of text glyphs.
//!
//! The stages run in order: decode the GIF, track keypoints, lay out the
//! text, align control points to the keypoint motion, optimize each frame to
//! keep glyph shape, then render and encode.

pub mod align;
pub mod deform;
pub mod frame;
pub mod geom;
pub mod gif;
pub mod glyph;
pub mod laplace;
pub mod motion;
pub mod par;
pub mod pipeline;
pub mod raster;
pub mod synth;
