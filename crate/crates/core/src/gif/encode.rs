use std::collections::HashMap;

use super::lzw;
use super::quantize::{median_cut, PaletteMapper, Rgb};
use super::GifError;
use crate::frame::{FrameSequence, LoopCount, Raster};

/// Encodes a frame sequence as GIF89a with one global palette.
pub fn encode_gif(seq: &FrameSequence) -> Result<Vec<u8>, GifError> {
    encode_frames(seq.frames(), seq.delays(), seq.loop_count())
}

/// Encodes raw frames. Alpha is ignored; frames are treated as opaque.
pub fn encode_frames(frames: &[Raster], delays: &[u16], loop_count: LoopCount) -> Result<Vec<u8>, GifError> {
    let first = frames.first().ok_or(GifError::Encode("no frames".into()))?;
    let (w, h) = (first.width(), first.height());
    if frames.iter().any(|f| f.width() != w || f.height() != h) {
        return Err(GifError::Encode("frames differ in size".into()));
    }
    if delays.len() != frames.len() {
        return Err(GifError::Encode("one delay per frame required".into()));
    }
    if w > u16::MAX as u32 || h > u16::MAX as u32 || w == 0 || h == 0 {
        return Err(GifError::Encode(format!("unsupported size {w}x{h}")));
    }

    let mut hist: HashMap<Rgb, u64> = HashMap::new();
    for f in frames {
        for px in f.as_bytes().chunks_exact(4) {
            *hist.entry([px[0], px[1], px[2]]).or_insert(0) += 1;
        }
    }
    let palette = median_cut(&hist, 256);
    let bits = bits_for(palette.len());
    let table_len = 1usize << bits;

    let mut out = Vec::with_capacity(1024);
    out.extend_from_slice(b"GIF89a");
    out.extend_from_slice(&(w as u16).to_le_bytes());
    out.extend_from_slice(&(h as u16).to_le_bytes());
    out.push(0x80 | (7 << 4) | (bits - 1));
    out.push(0);
    out.push(0);
    for i in 0..table_len {
        out.extend_from_slice(palette.get(i).unwrap_or(&[0, 0, 0]));
    }

    match loop_count {
        LoopCount::Once => {}
        LoopCount::Infinite | LoopCount::Finite(_) => {
            let n = match loop_count {
                LoopCount::Finite(n) => n,
                _ => 0,
            };
            out.extend_from_slice(&[0x21, 0xFF, 0x0B]);
            out.extend_from_slice(b"NETSCAPE2.0");
            out.extend_from_slice(&[0x03, 0x01]);
            out.extend_from_slice(&n.to_le_bytes());
            out.push(0);
        }
    }

    let min_code_size = bits.max(2);
    let mut mapper = PaletteMapper::new(&palette);
    for (f, &delay) in frames.iter().zip(delays) {
        // graphic control: disposal 1 (leave in place), no transparency
        out.extend_from_slice(&[0x21, 0xF9, 0x04, 1 << 2]);
        out.extend_from_slice(&delay.to_le_bytes());
        out.extend_from_slice(&[0, 0]);

        out.push(0x2C);
        out.extend_from_slice(&[0, 0, 0, 0]);
        out.extend_from_slice(&(w as u16).to_le_bytes());
        out.extend_from_slice(&(h as u16).to_le_bytes());
        out.push(0);

        let indices: Vec<u8> = f
            .as_bytes()
            .chunks_exact(4)
            .map(|px| mapper.index([px[0], px[1], px[2]]))
            .collect();
        out.push(min_code_size);
        for chunk in lzw::encode(min_code_size, &indices).chunks(255) {
            out.push(chunk.len() as u8);
            out.extend_from_slice(chunk);
        }
        out.push(0);
    }
    out.push(0x3B);
    Ok(out)
}

/// Smallest table exponent (1..=8) whose `2^bits` holds `n` colors.
fn bits_for(n: usize) -> u8 {
    let mut bits = 1;
    while (1usize << bits) < n {
        bits += 1;
    }
    bits
}
