//! Fixed-length clip extraction, augmentation and negative mining.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::annotation::StrokeAnnotation;
use super::video::RawVideo;
use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Label of mined background intervals.
pub const NEGATIVE_LABEL: &str = "negative";

/// Largest rotation applied by [`augment_clip`], in degrees.
pub const MAX_ROTATION_DEG: f64 = 10.0;

#[derive(Clone, Debug, PartialEq)]
pub struct Clip {
    /// `[3, T, H, W]`, values in `[0, 1]`.
    pub tensor: Tensor<f32>,
    pub label: usize,
    pub video: String,
    pub start: usize,
}

/// First frame of a `clip_len` window centered on `[begin, end]`, shifted
/// by `jitter` and clamped so the window stays inside the video.
pub fn clip_start(begin: usize, end: usize, clip_len: usize, jitter: i64, frame_count: usize) -> Result<usize> {
    if clip_len == 0 || frame_count < clip_len {
        return Err(Error::Extraction(format!(
            "video has {frame_count} frames, clips need {clip_len}"
        )));
    }
    let mid = ((begin + end) / 2) as i64;
    let start = mid - (clip_len as i64 / 2 - 1) + jitter;
    Ok(start.clamp(0, (frame_count - clip_len) as i64) as usize)
}

/// Frames `[start, start + len)` as a `[3, len, H, W]` tensor scaled to `[0, 1]`.
pub fn clip_tensor(video: &RawVideo, start: usize, len: usize) -> Result<Tensor<f32>> {
    if start + len > video.frame_count() {
        return Err(Error::Extraction(format!(
            "window [{start}, {}) exceeds {} frames",
            start + len,
            video.frame_count()
        )));
    }
    let (h, w) = (video.height(), video.width());
    let plane = len * h * w;
    let mut data = vec![0f32; 3 * plane];
    for t in 0..len {
        let frame = video.frame(start + t);
        for (p, px) in frame.chunks_exact(3).enumerate() {
            for c in 0..3 {
                data[c * plane + t * h * w + p] = px[c] as f32 / 255.0;
            }
        }
    }
    Tensor::new(vec![3, len, h, w], data)
}

pub fn extract_clip(
    video: &RawVideo,
    video_id: &str,
    annotation: &StrokeAnnotation,
    label: usize,
    jitter: i64,
    clip_len: usize,
) -> Result<Clip> {
    let start = clip_start(annotation.begin, annotation.end, clip_len, jitter, video.frame_count())?;
    Ok(Clip {
        tensor: clip_tensor(video, start, clip_len)?,
        label,
        video: video_id.to_string(),
        start,
    })
}

/// Random horizontal flip (p = 0.5) and rotation in ±10°, shared by all frames.
pub fn augment_clip(clip: &Clip, seed: u64) -> Clip {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let flip = rng.random_bool(0.5);
    let angle = rng.random_range(-MAX_ROTATION_DEG..=MAX_ROTATION_DEG);
    augment_with(clip, flip, angle)
}

/// Flips (optional) and then rotates by `angle_deg` about the frame
/// center, bilinear with zero fill.
pub fn augment_with(clip: &Clip, flip: bool, angle_deg: f64) -> Clip {
    let shape = clip.tensor.shape().to_vec();
    let (h, w) = (shape[2], shape[3]);
    let frames = shape[0] * shape[1];
    let src = clip.tensor.data();
    let mut out = src.to_vec();

    if flip {
        for (o, s) in out.chunks_mut(w).zip(src.chunks(w)) {
            for x in 0..w {
                o[x] = s[w - 1 - x];
            }
        }
    }

    if angle_deg != 0.0 {
        let flipped = out.clone();
        let (sin, cos) = angle_deg.to_radians().sin_cos();
        let (cy, cx) = ((h as f64 - 1.0) / 2.0, (w as f64 - 1.0) / 2.0);
        // Inverse map each output pixel to its source position once.
        let taps: Vec<Option<[(usize, f32); 4]>> = (0..h * w)
            .map(|p| {
                let (dy, dx) = ((p / w) as f64 - cy, (p % w) as f64 - cx);
                let sx = cos * dx + sin * dy + cx;
                let sy = -sin * dx + cos * dy + cy;
                bilinear_taps(sy, sx, h, w)
            })
            .collect();
        for f in 0..frames {
            let s = &flipped[f * h * w..(f + 1) * h * w];
            let o = &mut out[f * h * w..(f + 1) * h * w];
            for (v, tap) in o.iter_mut().zip(&taps) {
                *v = tap.map_or(0.0, |t| t.iter().map(|&(i, wt)| s[i] * wt).sum());
            }
        }
    }

    Clip {
        tensor: Tensor::new(shape, out).expect("shape unchanged"),
        ..clip.clone()
    }
}

/// Four source indices and weights; out-of-frame corners get weight zero.
fn bilinear_taps(sy: f64, sx: f64, h: usize, w: usize) -> Option<[(usize, f32); 4]> {
    if sy <= -1.0 || sx <= -1.0 || sy >= h as f64 || sx >= w as f64 {
        return None;
    }
    let (y0, x0) = (sy.floor(), sx.floor());
    let (fy, fx) = (sy - y0, sx - x0);
    let mut taps = [(0usize, 0f32); 4];
    for (k, (dy, dx, wt)) in [
        (0, 0, (1.0 - fy) * (1.0 - fx)),
        (0, 1, (1.0 - fy) * fx),
        (1, 0, fy * (1.0 - fx)),
        (1, 1, fy * fx),
    ]
    .into_iter()
    .enumerate()
    {
        let (y, x) = (y0 as i64 + dy, x0 as i64 + dx);
        if y >= 0 && x >= 0 && (y as usize) < h && (x as usize) < w {
            taps[k] = (y as usize * w + x as usize, wt as f32);
        }
    }
    Some(taps)
}

/// Draws up to `count` pairwise-disjoint `length`-frame intervals from
/// frames no annotation covers. Fewer are returned when space runs out.
pub fn mine_negative_segments(
    frame_count: usize,
    annotations: &[StrokeAnnotation],
    count: usize,
    length: usize,
    seed: u64,
) -> Vec<StrokeAnnotation> {
    if length == 0 {
        return Vec::new();
    }
    let mut covered = vec![false; frame_count];
    for a in annotations {
        for c in covered.iter_mut().take(a.end.saturating_add(1).min(frame_count)).skip(a.begin) {
            *c = true;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mined = Vec::new();
    while mined.len() < count {
        // Starts whose whole window is still free.
        let mut starts = Vec::new();
        let mut run = 0;
        for (f, &c) in covered.iter().enumerate() {
            run = if c { 0 } else { run + 1 };
            if run >= length {
                starts.push(f + 1 - length);
            }
        }
        if starts.is_empty() {
            break;
        }
        let s = starts[rng.random_range(0..starts.len())];
        covered[s..s + length].fill(true);
        mined.push(StrokeAnnotation::new(s, s + length - 1, NEGATIVE_LABEL));
    }
    mined.sort_by_key(|a| a.begin);
    mined
}
