//! Animated GIF decoding (with frame compositing) and encoding.

mod decode;
mod encode;
mod lzw;
pub mod quantize;

use thiserror::Error;

pub use decode::{decode_gif, decode_gif_with_limits, DecodeLimits, ZERO_DELAY_SUBSTITUTE};
pub use encode::{encode_frames, encode_gif};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GifError {
    #[error("not a GIF file (bad signature)")]
    BadSignature,
    #[error("unexpected end of data at byte {offset}")]
    Truncated { offset: usize },
    #[error("corrupt LZW data near byte {offset}: {reason}")]
    Lzw { offset: usize, reason: &'static str },
    #[error("invalid {what} at byte {offset}")]
    Invalid { offset: usize, what: String },
    #[error("GIF contains no image frames")]
    NoFrames,
    #[error("GIF exceeds decode limits: {0}")]
    TooLarge(String),
    #[error("cannot encode GIF: {0}")]
    Encode(String),
}

impl GifError {
    /// Byte offset associated with the error, when there is one.
    pub fn offset(&self) -> Option<usize> {
        match self {
            GifError::Truncated { offset }
            | GifError::Lzw { offset, .. }
            | GifError::Invalid { offset, .. } => Some(*offset),
            _ => None,
        }
    }
}
