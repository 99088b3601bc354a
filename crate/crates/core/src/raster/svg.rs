//! Vector export: one SVG document per frame plus a JSON manifest.

use std::fmt::Write as _;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::render::RenderSpec;
use crate::geom::Point;
use crate::glyph::GlyphContour;

pub const MANIFEST_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestFrame {
    pub file: String,
    pub delay_cs: u16,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SvgManifest {
    pub version: u32,
    pub width: u32,
    pub height: u32,
    pub frames: Vec<ManifestFrame>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SvgBundle {
    pub manifest: SvgManifest,
    /// `(file name, document)` in frame order.
    pub documents: Vec<(String, String)>,
}

fn coord(out: &mut String, p: Point, spec: &RenderSpec) {
    let _ = write!(out, "{:.3} {:.3}", p.x * spec.width as f64, p.y * spec.height as f64);
}

/// Path data for one closed contour, using `Q` for curved spans.
pub fn contour_path(contour: &GlyphContour, spec: &RenderSpec) -> String {
    let c = if contour.has_implicit_points() {
        contour.explicitize()
    } else {
        contour.clone()
    };
    let n = c.len();
    let Some(start) = c.on_curve.iter().position(|&on| on) else {
        return String::new();
    };
    let at = |k: usize| (c.points[(start + k) % n], c.on_curve[(start + k) % n]);
    let mut d = String::from("M");
    coord(&mut d, at(0).0, spec);
    let mut k = 0;
    while k < n {
        let (p1, on1) = at(k + 1);
        if on1 {
            d.push_str(" L");
            coord(&mut d, p1, spec);
            k += 1;
        } else {
            d.push_str(" Q");
            coord(&mut d, p1, spec);
            d.push(' ');
            coord(&mut d, at(k + 2).0, spec);
            k += 2;
        }
    }
    d.push_str(" Z");
    d
}

pub fn frame_svg(contours: &[GlyphContour], spec: &RenderSpec) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#,
        w = spec.width,
        h = spec.height
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="{}"/>"#, spec.background.to_hex());
    let _ = writeln!(s, r#"<g fill="{}" fill-rule="nonzero">"#, spec.fill.to_hex());
    for c in contours {
        let _ = writeln!(s, r#"<path d="{}"/>"#, contour_path(c, spec));
    }
    s.push_str("</g>\n</svg>\n");
    s
}

pub fn svg_bundle(frames: &[Vec<GlyphContour>], delays: &[u16], spec: &RenderSpec) -> SvgBundle {
    let documents: Vec<(String, String)> = frames
        .iter()
        .enumerate()
        .map(|(f, c)| (format!("frame_{:04}.svg", f + 1), frame_svg(c, spec)))
        .collect();
    let manifest = SvgManifest {
        version: MANIFEST_VERSION,
        width: spec.width,
        height: spec.height,
        frames: documents
            .iter()
            .zip(delays)
            .map(|((file, _), &delay_cs)| ManifestFrame { file: file.clone(), delay_cs })
            .collect(),
    };
    SvgBundle { manifest, documents }
}

impl SvgBundle {
    pub fn manifest_json(&self) -> String {
        serde_json::to_string_pretty(&self.manifest).expect("manifest serializes")
    }

    /// Writes every frame and `manifest.json` into `dir`, creating it if needed.
    pub fn write_to(&self, dir: &Path) -> io::Result<()> {
        std::fs::create_dir_all(dir)?;
        for (name, doc) in &self.documents {
            std::fs::write(dir.join(name), doc)?;
        }
        std::fs::write(dir.join("manifest.json"), self.manifest_json())
    }
}
