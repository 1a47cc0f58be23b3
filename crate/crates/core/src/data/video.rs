//! Uncompressed RGB video container and frame resizing.
//!
//! Layout: `RVID`, then little-endian u32 version, width, height,
//! frame count and channel count (always 3), then the frames as
//! row-major `u8` RGB.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"RVID";
const VERSION: u32 = 1;
const CHANNELS: u32 = 3;
const HEADER_LEN: usize = 4 + 5 * 4;

#[derive(Clone, PartialEq, Eq)]
pub struct RawVideo {
    width: usize,
    height: usize,
    frame_count: usize,
    frames: Vec<u8>,
}

impl std::fmt::Debug for RawVideo {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RawVideo")
            .field("width", &self.width)
            .field("height", &self.height)
            .field("frame_count", &self.frame_count)
            .finish_non_exhaustive()
    }
}

impl RawVideo {
    pub fn new(width: usize, height: usize, frame_count: usize, frames: Vec<u8>) -> Result<Self> {
        let expected = frame_count * height * width * 3;
        if frames.len() != expected {
            return Err(Error::dim(format!(
                "{frame_count} frames of {width}x{height} RGB need {expected} bytes, got {}",
                frames.len()
            )));
        }
        Ok(Self {
            width,
            height,
            frame_count,
            frames,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn frame_count(&self) -> usize {
        self.frame_count
    }

    pub fn frame_bytes(&self) -> usize {
        self.width * self.height * 3
    }

    pub fn frames(&self) -> &[u8] {
        &self.frames
    }

    /// Interleaved RGB bytes of frame `t`.
    pub fn frame(&self, t: usize) -> &[u8] {
        let n = self.frame_bytes();
        &self.frames[t * n..(t + 1) * n]
    }

    pub fn pixel(&self, t: usize, y: usize, x: usize) -> [u8; 3] {
        let i = ((t * self.height + y) * self.width + x) * 3;
        [self.frames[i], self.frames[i + 1], self.frames[i + 2]]
    }
}

pub fn encode_raw_video(video: &RawVideo) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + video.frames.len());
    out.extend_from_slice(MAGIC);
    for v in [
        VERSION,
        video.width as u32,
        video.height as u32,
        video.frame_count as u32,
        CHANNELS,
    ] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out.extend_from_slice(&video.frames);
    out
}

pub fn decode_raw_video(bytes: &[u8]) -> Result<RawVideo> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::Format(format!("video header truncated: {} bytes", bytes.len())));
    }
    if &bytes[..4] != MAGIC {
        return Err(Error::Format(format!("bad magic {:?}, expected RVID", &bytes[..4])));
    }
    let field = |i: usize| u32::from_le_bytes(bytes[4 + 4 * i..8 + 4 * i].try_into().expect("4 bytes")) as usize;
    let (version, width, height, frame_count, channels) = (field(0), field(1), field(2), field(3), field(4));
    if version != VERSION as usize {
        return Err(Error::Format(format!("unsupported video version {version}")));
    }
    if channels != CHANNELS as usize {
        return Err(Error::Format(format!("expected 3 channels, header says {channels}")));
    }
    let expected = frame_count
        .checked_mul(height)
        .and_then(|v| v.checked_mul(width))
        .and_then(|v| v.checked_mul(3))
        .ok_or_else(|| Error::Format("video dimensions overflow".into()))?;
    let payload = &bytes[HEADER_LEN..];
    if payload.len() != expected {
        return Err(Error::Format(format!(
            "header declares {frame_count} frames of {width}x{height} ({expected} bytes), payload has {}",
            payload.len()
        )));
    }
    RawVideo::new(width, height, frame_count, payload.to_vec())
}

pub fn write_raw_video(video: &RawVideo, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_raw_video(video)).map_err(|e| Error::io(path, e))
}

pub fn read_raw_video(path: impl AsRef<Path>) -> Result<RawVideo> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_raw_video(&bytes)
}

/// Height that keeps the aspect ratio at `target_width`, rounded to the nearest even number.
pub fn resized_height(width: usize, height: usize, target_width: usize) -> usize {
    let exact = height as f64 * target_width as f64 / width as f64;
    (2.0 * (exact / 2.0).round()).max(2.0) as usize
}

/// Source sample positions and weights for one output axis (half-pixel centers).
fn axis_taps(src: usize, dst: usize) -> Vec<(usize, usize, f32)> {
    let scale = src as f64 / dst as f64;
    (0..dst)
        .map(|o| {
            let s = ((o as f64 + 0.5) * scale - 0.5).clamp(0.0, (src - 1) as f64);
            let i0 = s.floor() as usize;
            let i1 = (i0 + 1).min(src - 1);
            (i0, i1, (s - i0 as f64) as f32)
        })
        .collect()
}

/// Downscales every frame to `target_width` with bilinear interpolation.
pub fn resize_video(video: &RawVideo, target_width: usize) -> Result<RawVideo> {
    if target_width == 0 || target_width > video.width {
        return Err(Error::config(format!(
            "cannot resize a {}-pixel-wide video to width {target_width}",
            video.width
        )));
    }
    if target_width == video.width {
        return Ok(video.clone());
    }
    let th = resized_height(video.width, video.height, target_width);
    resize_frames(video, target_width, th)
}

/// Bilinear resize to an explicit frame size.
pub fn resize_frames(video: &RawVideo, width: usize, height: usize) -> Result<RawVideo> {
    if width == 0 || height == 0 {
        return Err(Error::config(format!("invalid target size {width}x{height}")));
    }
    if (width, height) == (video.width, video.height) {
        return Ok(video.clone());
    }
    let xs = axis_taps(video.width, width);
    let ys = axis_taps(video.height, height);
    let mut out = vec![0u8; video.frame_count * height * width * 3];
    let sw = video.width * 3;
    for (t, dst) in out.chunks_mut(height * width * 3).enumerate() {
        let src = video.frame(t);
        for (oy, &(y0, y1, fy)) in ys.iter().enumerate() {
            for (ox, &(x0, x1, fx)) in xs.iter().enumerate() {
                for c in 0..3 {
                    let p = |y: usize, x: usize| src[y * sw + x * 3 + c] as f32;
                    let top = p(y0, x0) * (1.0 - fx) + p(y0, x1) * fx;
                    let bottom = p(y1, x0) * (1.0 - fx) + p(y1, x1) * fx;
                    let v = top * (1.0 - fy) + bottom * fy;
                    dst[(oy * width + ox) * 3 + c] = v.round().clamp(0.0, 255.0) as u8;
                }
            }
        }
    }
    RawVideo::new(width, height, video.frame_count, out)
}
