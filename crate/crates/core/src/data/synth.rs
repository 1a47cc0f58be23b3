//! Synthetic untrimmed videos with moving-bar strokes over a noisy background.
//!
//! Class 0 is the background ("negative"). Positive class `k` draws a bar
//! whose orientation, speed, direction and tint are a function of `k`.
//! The signature only uses horizontal and vertical bars, so horizontal
//! flips never turn one class into another.

use std::fs;
use std::path::Path;

use rand::{seq::SliceRandom, Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::annotation::{write_annotation_xml, StrokeAnnotation};
use super::clip::NEGATIVE_LABEL;
use super::dataset::{write_manifest, ManifestEntry, Split, CLASSES_FILE, MANIFEST_FILE};
use super::video::{write_raw_video, RawVideo};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct SynthConfig {
    /// Including the negative class.
    pub num_classes: usize,
    /// Videos in the train, validation and test splits.
    pub videos: [usize; 3],
    pub width: usize,
    pub height: usize,
    pub strokes_per_video: usize,
    /// Inclusive range of stroke lengths in frames.
    pub stroke_len: (usize, usize),
    /// Inclusive range of background gaps between strokes.
    pub gap_len: (usize, usize),
    /// Half-width of the uniform background noise.
    pub noise: u8,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            num_classes: 5,
            videos: [8, 2, 4],
            width: 64,
            height: 64,
            strokes_per_video: 4,
            stroke_len: (60, 180),
            gap_len: (30, 120),
            noise: 24,
            seed: 7,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_classes < 2 {
            return Err(Error::config("synthetic data needs at least two classes"));
        }
        if self.width < 4 || self.height < 4 {
            return Err(Error::config(format!("frame size {}x{} is too small", self.width, self.height)));
        }
        let (s0, s1) = self.stroke_len;
        let (g0, g1) = self.gap_len;
        if s0 == 0 || s0 > s1 || g0 > g1 {
            return Err(Error::config("stroke and gap ranges must be non-empty"));
        }
        Ok(())
    }
}

/// `negative`, then `bar_01`, `bar_02`, ...
pub fn synth_class_names(num_classes: usize) -> Vec<String> {
    std::iter::once(NEGATIVE_LABEL.to_string())
        .chain((1..num_classes).map(|k| format!("bar_{k:02}")))
        .collect()
}

struct Pattern {
    vertical: bool,
    speed: f64,
    dir: f64,
    thickness: f64,
    color: [f64; 3],
}

fn pattern(class: usize, width: usize, height: usize) -> Pattern {
    let j = class - 1;
    let hue = (j as f64 * 0.618_033_988_75).fract();
    // Saturated tint from the hue.
    let color = [0.0, 1.0 / 3.0, 2.0 / 3.0].map(|o| {
        let c = ((hue + o) * std::f64::consts::TAU).cos();
        150.0 + 100.0 * c
    });
    let vertical = j % 2 == 1;
    Pattern {
        vertical,
        speed: 1.0 + ((j / 2) % 3) as f64,
        // Vertical bars always move right: flips would reverse them.
        dir: if vertical || (j / 6).is_multiple_of(2) { 1.0 } else { -1.0 },
        thickness: (width.min(height) as f64 / 6.0).max(2.0),
        color,
    }
}

/// One untrimmed video and its ground truth, fully determined by `cfg.seed` and `stream`.
pub fn synth_video(cfg: &SynthConfig, stream: u64) -> Result<(RawVideo, Vec<StrokeAnnotation>)> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(stream);
    let names = synth_class_names(cfg.num_classes);

    let positives = cfg.num_classes - 1;
    let mut classes: Vec<usize> = (0..cfg.strokes_per_video)
        .map(|j| 1 + (stream as usize * cfg.strokes_per_video + j) % positives)
        .collect();
    classes.shuffle(&mut rng);

    let mut layout = Vec::new();
    let mut cursor = rng.random_range(cfg.gap_len.0..=cfg.gap_len.1);
    for &class in &classes {
        let len = rng.random_range(cfg.stroke_len.0..=cfg.stroke_len.1);
        layout.push((cursor, cursor + len - 1, class));
        cursor += len + rng.random_range(cfg.gap_len.0..=cfg.gap_len.1);
    }
    let frame_count = cursor;

    let (w, h) = (cfg.width, cfg.height);
    let mut frames = vec![0u8; frame_count * w * h * 3];
    let noise = cfg.noise as i32;
    for px in frames.iter_mut() {
        *px = (96 + rng.random_range(-noise..=noise)).clamp(0, 255) as u8;
    }
    for &(begin, end, class) in &layout {
        let p = pattern(class, w, h);
        let extent = if p.vertical { w } else { h } as f64;
        // Keeps at least one pixel row of the bar on screen.
        let period = extent + p.thickness - 2.0;
        let phase = rng.random_range(0.0..period);
        for t in begin..=end {
            let u = (phase + p.dir * p.speed * (t - begin) as f64).rem_euclid(period) - (p.thickness - 1.0);
            let frame = &mut frames[t * w * h * 3..(t + 1) * w * h * 3];
            for y in 0..h {
                for x in 0..w {
                    let d = if p.vertical { x } else { y } as f64;
                    if d >= u && d < u + p.thickness {
                        let i = (y * w + x) * 3;
                        for c in 0..3 {
                            frame[i + c] = p.color[c].round() as u8;
                        }
                    }
                }
            }
        }
    }

    let annotations = layout
        .into_iter()
        .map(|(b, e, class)| StrokeAnnotation::new(b, e, names[class].clone()))
        .collect();
    Ok((RawVideo::new(w, h, frame_count, frames)?, annotations))
}

/// Writes `videos/`, `annotations/`, the split manifest and the class list under `out_dir`.
pub fn synth_dataset(cfg: &SynthConfig, out_dir: impl AsRef<Path>) -> Result<Vec<ManifestEntry>> {
    cfg.validate()?;
    let out = out_dir.as_ref();
    for sub in ["videos", "annotations"] {
        let dir = out.join(sub);
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    }
    let mut entries = Vec::new();
    let mut stream = 0u64;
    for (split, &n) in Split::ALL.iter().zip(&cfg.videos) {
        for i in 0..n {
            let id = format!("{split}_{i:03}");
            let (video, annotations) = synth_video(cfg, stream)?;
            stream += 1;
            let video_rel = format!("videos/{id}.rvid");
            let ann_rel = format!("annotations/{id}.xml");
            write_raw_video(&video, out.join(&video_rel))?;
            let ann_path = out.join(&ann_rel);
            fs::write(&ann_path, write_annotation_xml(&id, &annotations)).map_err(|e| Error::io(&ann_path, e))?;
            entries.push(ManifestEntry {
                video: video_rel.into(),
                annotation: ann_rel.into(),
                split: *split,
            });
        }
    }
    write_manifest(&entries, out.join(MANIFEST_FILE))?;
    let classes = out.join(CLASSES_FILE);
    let mut text = synth_class_names(cfg.num_classes).join("\n");
    text.push('\n');
    fs::write(&classes, text).map_err(|e| Error::io(&classes, e))?;
    Ok(entries)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SynthConfig {
        SynthConfig {
            videos: [1, 1, 1],
            width: 12,
            height: 8,
            ..Default::default()
        }
    }

    #[test]
    fn annotations_are_valid_and_separated() {
        for stream in 0..4 {
            let (v, ann) = synth_video(&small(), stream).unwrap();
            assert_eq!(ann.len(), 4);
            assert!(ann[0].begin >= 30);
            for a in &ann {
                assert!(a.begin <= a.end && a.end < v.frame_count());
                assert!((60..=180).contains(&a.frames()));
            }
            for w in ann.windows(2) {
                assert!(w[1].begin - w[0].end - 1 >= 30);
            }
        }
    }

    #[test]
    fn streams_are_deterministic_and_distinct() {
        let a = synth_video(&small(), 3).unwrap();
        assert_eq!(a, synth_video(&small(), 3).unwrap());
        assert_ne!(a, synth_video(&small(), 4).unwrap());
    }

    #[test]
    fn labels_cycle_over_positive_classes() {
        let (_, ann) = synth_video(&small(), 0).unwrap();
        let mut labels: Vec<_> = ann.iter().map(|a| a.label.clone()).collect();
        labels.sort();
        assert_eq!(labels, ["bar_01", "bar_02", "bar_03", "bar_04"]);
    }

    #[test]
    fn strokes_differ_from_background() {
        let (v, ann) = synth_video(&small(), 0).unwrap();
        let bright = |t: usize| v.frame(t).iter().filter(|&&b| b > 140 || b < 50).count();
        let a = &ann[0];
        assert!((a.begin..=a.end).all(|t| bright(t) > 0));
        assert_eq!(bright(a.begin - 1), 0);
    }
}
