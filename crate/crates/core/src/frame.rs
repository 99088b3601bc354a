//! RGBA rasters and decoded frame sequences.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// An 8-bit RGBA color.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Rgba(pub [u8; 4]);

impl Rgba {
    pub const WHITE: Rgba = Rgba([255, 255, 255, 255]);
    pub const BLACK: Rgba = Rgba([0, 0, 0, 255]);
    pub const TRANSPARENT: Rgba = Rgba([0, 0, 0, 0]);

    pub const fn rgb(r: u8, g: u8, b: u8) -> Rgba {
        Rgba([r, g, b, 255])
    }

    pub fn r(self) -> u8 {
        self.0[0]
    }
    pub fn g(self) -> u8 {
        self.0[1]
    }
    pub fn b(self) -> u8 {
        self.0[2]
    }
    pub fn a(self) -> u8 {
        self.0[3]
    }

    /// Euclidean distance over the RGB channels, in 0..=255 units.
    pub fn rgb_distance(self, other: Rgba) -> f64 {
        let dr = self.r() as f64 - other.r() as f64;
        let dg = self.g() as f64 - other.g() as f64;
        let db = self.b() as f64 - other.b() as f64;
        (dr * dr + dg * dg + db * db).sqrt()
    }

    /// Parses `#rrggbb` or `#rrggbbaa`.
    pub fn from_hex(s: &str) -> Option<Rgba> {
        let s = s.strip_prefix('#').unwrap_or(s);
        let byte = |i: usize| u8::from_str_radix(s.get(i..i + 2)?, 16).ok();
        match s.len() {
            6 => Some(Rgba([byte(0)?, byte(2)?, byte(4)?, 255])),
            8 => Some(Rgba([byte(0)?, byte(2)?, byte(4)?, byte(6)?])),
            _ => None,
        }
    }

    pub fn to_hex(self) -> String {
        let [r, g, b, a] = self.0;
        if a == 255 {
            format!("#{r:02x}{g:02x}{b:02x}")
        } else {
            format!("#{r:02x}{g:02x}{b:02x}{a:02x}")
        }
    }
}

/// A row-major RGBA8 image.
#[derive(Clone, PartialEq, Eq)]
pub struct Raster {
    width: u32,
    height: u32,
    data: Vec<u8>,
}

impl std::fmt::Debug for Raster {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Raster")
            .field("width", &self.width)
            .field("height", &self.height)
            .finish_non_exhaustive()
    }
}

impl Raster {
    pub fn filled(width: u32, height: u32, color: Rgba) -> Raster {
        let n = width as usize * height as usize;
        let mut data = Vec::with_capacity(n * 4);
        for _ in 0..n {
            data.extend_from_slice(&color.0);
        }
        Raster {
            width,
            height,
            data,
        }
    }

    /// Wraps raw RGBA bytes; `None` if the length does not match.
    pub fn from_rgba(width: u32, height: u32, data: Vec<u8>) -> Option<Raster> {
        (data.len() == width as usize * height as usize * 4).then_some(Raster {
            width,
            height,
            data,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.data
    }

    pub fn as_bytes_mut(&mut self) -> &mut [u8] {
        &mut self.data
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.data
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> Rgba {
        let i = (y as usize * self.width as usize + x as usize) * 4;
        Rgba([
            self.data[i],
            self.data[i + 1],
            self.data[i + 2],
            self.data[i + 3],
        ])
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, c: Rgba) {
        let i = (y as usize * self.width as usize + x as usize) * 4;
        self.data[i..i + 4].copy_from_slice(&c.0);
    }

    pub fn pixels(&self) -> impl Iterator<Item = Rgba> + '_ {
        self.data
            .chunks_exact(4)
            .map(|c| Rgba([c[0], c[1], c[2], c[3]]))
    }

    /// Number of pixels that differ between two rasters of equal size.
    pub fn diff_count(&self, other: &Raster) -> usize {
        assert_eq!(
            (self.width, self.height),
            (other.width, other.height),
            "raster size mismatch"
        );
        self.data
            .chunks_exact(4)
            .zip(other.data.chunks_exact(4))
            .filter(|(a, b)| a != b)
            .count()
    }

    /// The most frequent color along the one-pixel border, ignoring fully
    /// transparent pixels. Ties go to the smallest color value.
    pub fn modal_border_color(&self) -> Option<Rgba> {
        let (w, h) = (self.width, self.height);
        if w == 0 || h == 0 {
            return None;
        }
        let mut counts: HashMap<Rgba, usize> = HashMap::new();
        let mut visit = |x: u32, y: u32| {
            let c = self.get(x, y);
            if c.a() != 0 {
                *counts.entry(c).or_default() += 1;
            }
        };
        for x in 0..w {
            visit(x, 0);
            if h > 1 {
                visit(x, h - 1);
            }
        }
        for y in 1..h.saturating_sub(1) {
            visit(0, y);
            if w > 1 {
                visit(w - 1, y);
            }
        }
        counts
            .into_iter()
            .max_by(|(ca, na), (cb, nb)| na.cmp(nb).then_with(|| cb.cmp(ca)))
            .map(|(c, _)| c)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FrameError {
    #[error("frame sequence is empty")]
    Empty,
    #[error("frame {index} is {got_w}x{got_h}, expected {want_w}x{want_h}")]
    SizeMismatch {
        index: usize,
        got_w: u32,
        got_h: u32,
        want_w: u32,
        want_h: u32,
    },
    #[error("delay list has {delays} entries for {frames} frames")]
    DelayCount { frames: usize, delays: usize },
    #[error("frame {index} has zero delay")]
    ZeroDelay { index: usize },
}

/// Loop count carried by the Netscape application extension.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum LoopCount {
    /// Extension present with count 0.
    #[default]
    Infinite,
    /// Extension present with a nonzero repeat count.
    Finite(u16),
    /// No extension: the animation plays once.
    Once,
}

/// A sequence of full-canvas RGBA frames with per-frame delays in
/// centiseconds. Always non-empty with uniform dimensions.
#[derive(Clone, Debug, PartialEq)]
pub struct FrameSequence {
    frames: Vec<Raster>,
    delays: Vec<u16>,
    loop_count: LoopCount,
}

impl FrameSequence {
    pub fn new(
        frames: Vec<Raster>,
        delays: Vec<u16>,
        loop_count: LoopCount,
    ) -> Result<FrameSequence, FrameError> {
        let first = frames.first().ok_or(FrameError::Empty)?;
        let (w, h) = (first.width(), first.height());
        for (index, f) in frames.iter().enumerate() {
            if f.width() != w || f.height() != h {
                return Err(FrameError::SizeMismatch {
                    index,
                    got_w: f.width(),
                    got_h: f.height(),
                    want_w: w,
                    want_h: h,
                });
            }
        }
        if delays.len() != frames.len() {
            return Err(FrameError::DelayCount {
                frames: frames.len(),
                delays: delays.len(),
            });
        }
        if let Some(index) = delays.iter().position(|&d| d == 0) {
            return Err(FrameError::ZeroDelay { index });
        }
        Ok(FrameSequence {
            frames,
            delays,
            loop_count,
        })
    }

    /// Uniform delay for every frame.
    pub fn with_uniform_delay(
        frames: Vec<Raster>,
        delay_cs: u16,
    ) -> Result<FrameSequence, FrameError> {
        let n = frames.len();
        FrameSequence::new(frames, vec![delay_cs; n], LoopCount::Infinite)
    }

    pub fn frames(&self) -> &[Raster] {
        &self.frames
    }

    pub fn delays(&self) -> &[u16] {
        &self.delays
    }

    pub fn loop_count(&self) -> LoopCount {
        self.loop_count
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn width(&self) -> u32 {
        self.frames[0].width()
    }

    pub fn height(&self) -> u32 {
        self.frames[0].height()
    }

    pub fn into_frames(self) -> Vec<Raster> {
        self.frames
    }
}
