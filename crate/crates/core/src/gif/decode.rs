use super::lzw;
use super::GifError;
use crate::frame::{FrameSequence, LoopCount, Raster, Rgba};

/// Caps on decoded size so hostile headers cannot exhaust memory.
#[derive(Clone, Copy, Debug)]
pub struct DecodeLimits {
    /// Maximum logical screen area in pixels.
    pub max_pixels: u64,
    /// Maximum total bytes across all decoded RGBA frames.
    pub max_total_bytes: u64,
}

impl Default for DecodeLimits {
    fn default() -> Self {
        DecodeLimits {
            max_pixels: 1 << 24,
            max_total_bytes: 1 << 30,
        }
    }
}

/// Delay substituted for frames that declare 0 cs, as browsers do.
pub const ZERO_DELAY_SUBSTITUTE: u16 = 10;

struct Cursor<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn u8(&mut self) -> Result<u8, GifError> {
        let b = *self
            .data
            .get(self.pos)
            .ok_or(GifError::Truncated { offset: self.pos })?;
        self.pos += 1;
        Ok(b)
    }

    fn u16(&mut self) -> Result<u16, GifError> {
        Ok(u16::from_le_bytes([self.u8()?, self.u8()?]))
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], GifError> {
        let end = self.pos + n;
        if end > self.data.len() {
            return Err(GifError::Truncated {
                offset: self.data.len(),
            });
        }
        let s = &self.data[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    /// Concatenates a chain of data sub-blocks.
    fn sub_blocks(&mut self) -> Result<Vec<u8>, GifError> {
        let mut out = Vec::new();
        loop {
            let n = self.u8()? as usize;
            if n == 0 {
                return Ok(out);
            }
            out.extend_from_slice(self.take(n)?);
        }
    }

    fn skip_sub_blocks(&mut self) -> Result<(), GifError> {
        loop {
            let n = self.u8()? as usize;
            if n == 0 {
                return Ok(());
            }
            self.take(n)?;
        }
    }

    fn color_table(&mut self, size_field: u8) -> Result<Vec<Rgba>, GifError> {
        let n = 2usize << size_field;
        let raw = self.take(3 * n)?;
        Ok(raw.chunks_exact(3).map(|c| Rgba::rgb(c[0], c[1], c[2])).collect())
    }
}

#[derive(Clone, Copy, Default)]
struct Control {
    disposal: u8,
    delay: u16,
    transparent: Option<u8>,
}

#[derive(Clone, Copy)]
struct Rect {
    left: u32,
    top: u32,
    width: u32,
    height: u32,
}

/// Decodes a GIF87a/GIF89a stream into fully composited frames.
pub fn decode_gif(bytes: &[u8]) -> Result<FrameSequence, GifError> {
    decode_gif_with_limits(bytes, DecodeLimits::default())
}

pub fn decode_gif_with_limits(bytes: &[u8], limits: DecodeLimits) -> Result<FrameSequence, GifError> {
    let mut c = Cursor { data: bytes, pos: 0 };
    let sig = c.take(6).map_err(|_| GifError::BadSignature)?;
    if sig != b"GIF87a" && sig != b"GIF89a" {
        return Err(GifError::BadSignature);
    }
    let width = c.u16()? as u32;
    let height = c.u16()? as u32;
    if width == 0 || height == 0 {
        return Err(GifError::Invalid {
            offset: 6,
            what: format!("logical screen size {width}x{height}"),
        });
    }
    let area = width as u64 * height as u64;
    if area > limits.max_pixels {
        return Err(GifError::TooLarge(format!("{width}x{height} screen")));
    }
    let packed = c.u8()?;
    let bg_index = c.u8()?;
    let _aspect = c.u8()?;
    let global = if packed & 0x80 != 0 {
        Some(c.color_table(packed & 0x07)?)
    } else {
        None
    };

    let mut canvas = Raster::filled(width, height, Rgba::TRANSPARENT);
    let mut frames = Vec::new();
    let mut delays = Vec::new();
    let mut loop_count = LoopCount::Once;
    let mut control = Control::default();
    let mut pending_clear: Option<Rect> = None;
    let mut total_bytes = 0u64;

    loop {
        let block_offset = c.pos;
        match c.u8()? {
            0x3B => break,
            0x21 => {
                let label = c.u8()?;
                match label {
                    0xF9 => {
                        let body = c.sub_blocks()?;
                        if body.len() < 4 {
                            return Err(GifError::Invalid {
                                offset: block_offset,
                                what: "graphic control extension length".into(),
                            });
                        }
                        control = Control {
                            disposal: (body[0] >> 2) & 0x07,
                            delay: u16::from_le_bytes([body[1], body[2]]),
                            transparent: (body[0] & 0x01 != 0).then_some(body[3]),
                        };
                    }
                    0xFF => {
                        let n = c.u8()? as usize;
                        let ident = c.take(n)?;
                        let body = c.sub_blocks()?;
                        if (ident == b"NETSCAPE2.0" || ident == b"ANIMEXTS1.0")
                            && body.len() >= 3
                            && body[0] == 1
                        {
                            loop_count = match u16::from_le_bytes([body[1], body[2]]) {
                                0 => LoopCount::Infinite,
                                n => LoopCount::Finite(n),
                            };
                        }
                    }
                    _ => c.skip_sub_blocks()?,
                }
            }
            0x2C => {
                let rect = Rect {
                    left: c.u16()? as u32,
                    top: c.u16()? as u32,
                    width: c.u16()? as u32,
                    height: c.u16()? as u32,
                };
                let packed = c.u8()?;
                let local = if packed & 0x80 != 0 {
                    Some(c.color_table(packed & 0x07)?)
                } else {
                    None
                };
                let interlaced = packed & 0x40 != 0;
                let table = local.as_ref().or(global.as_ref()).ok_or(GifError::Invalid {
                    offset: block_offset,
                    what: "image without any color table".into(),
                })?;
                let min_code_size = c.u8()?;
                let data_offset = c.pos;
                let data = c.sub_blocks()?;
                let expected = rect.width as usize * rect.height as usize;
                if expected as u64 > limits.max_pixels {
                    return Err(GifError::TooLarge(format!(
                        "{}x{} image",
                        rect.width, rect.height
                    )));
                }
                let indices = lzw::decode(min_code_size, &data, expected).map_err(|e| {
                    GifError::Lzw {
                        offset: data_offset + e.position,
                        reason: e.reason,
                    }
                })?;

                if let Some(r) = pending_clear.take() {
                    clear_rect(&mut canvas, r);
                }
                draw(&mut canvas, rect, interlaced, &indices, table, control.transparent);

                total_bytes += area * 4;
                if total_bytes > limits.max_total_bytes {
                    return Err(GifError::TooLarge(format!("{} frames", frames.len() + 1)));
                }
                frames.push(canvas.clone());
                delays.push(if control.delay == 0 {
                    ZERO_DELAY_SUBSTITUTE
                } else {
                    control.delay
                });
                // 2 = restore to background; 3 (restore to previous) is
                // handled the same way.
                if matches!(control.disposal, 2 | 3) {
                    pending_clear = Some(rect);
                }
                control = Control::default();
            }
            other => {
                return Err(GifError::Invalid {
                    offset: block_offset,
                    what: format!("block introducer 0x{other:02x}"),
                })
            }
        }
    }

    if frames.is_empty() {
        return Err(GifError::NoFrames);
    }

    let background = frames[0]
        .modal_border_color()
        .map(|c| Rgba([c.r(), c.g(), c.b(), 255]))
        .or_else(|| global.as_ref().and_then(|t| t.get(bg_index as usize).copied()))
        .unwrap_or(Rgba::WHITE);
    for f in &mut frames {
        flatten_onto(f, background);
    }
    FrameSequence::new(frames, delays, loop_count).map_err(|e| GifError::Invalid {
        offset: 0,
        what: e.to_string(),
    })
}

fn clear_rect(canvas: &mut Raster, r: Rect) {
    let x1 = (r.left + r.width).min(canvas.width());
    let y1 = (r.top + r.height).min(canvas.height());
    for y in r.top.min(y1)..y1 {
        for x in r.left.min(x1)..x1 {
            canvas.set(x, y, Rgba::TRANSPARENT);
        }
    }
}

fn interlaced_rows(height: u32) -> Vec<u32> {
    let mut rows = Vec::with_capacity(height as usize);
    for (start, step) in [(0, 8), (4, 8), (2, 4), (1, 2)] {
        rows.extend((start..height).step_by(step));
    }
    rows
}

fn draw(
    canvas: &mut Raster,
    rect: Rect,
    interlaced: bool,
    indices: &[u8],
    table: &[Rgba],
    transparent: Option<u8>,
) {
    let rows: Vec<u32> = if interlaced {
        interlaced_rows(rect.height)
    } else {
        (0..rect.height).collect()
    };
    for (row_i, &row) in rows.iter().enumerate() {
        let y = rect.top + row;
        if y >= canvas.height() {
            continue;
        }
        let base = row_i * rect.width as usize;
        for col in 0..rect.width {
            let x = rect.left + col;
            if x >= canvas.width() {
                break;
            }
            let Some(&idx) = indices.get(base + col as usize) else {
                return;
            };
            if Some(idx) == transparent {
                continue;
            }
            if let Some(&color) = table.get(idx as usize) {
                canvas.set(x, y, color);
            }
        }
    }
}

fn flatten_onto(frame: &mut Raster, bg: Rgba) {
    for px in frame.as_bytes_mut().chunks_exact_mut(4) {
        if px[3] == 0 {
            px.copy_from_slice(&bg.0);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interlace_order() {
        assert_eq!(interlaced_rows(10), vec![0, 8, 4, 2, 6, 1, 3, 5, 7, 9]);
    }
}
