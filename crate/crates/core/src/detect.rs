//! Clip classification and stroke detection from window scores.
//!
//! Sliding mode scores every window (stride 1), fuses the window
//! probabilities into per-frame vectors, decides stroke or background per
//! frame and keeps runs of stroke frames as segments. Proposal mode
//! classifies fixed-length non-overlapping slices instead.

use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;

use crate::data::{clip_start, clip_tensor, RawVideo, StrokeAnnotation};
use crate::error::{Error, Result};
use crate::model::Classifier;
use crate::tensor::{argmax, Tensor};

/// A detected stroke over inclusive frames `[begin, end]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Segment {
    pub begin: usize,
    pub end: usize,
    pub label: usize,
    pub confidence: f64,
}

impl Segment {
    pub fn new(begin: usize, end: usize, label: usize, confidence: f64) -> Self {
        Self {
            begin,
            end,
            label,
            confidence,
        }
    }

    pub fn frames(&self) -> usize {
        self.end + 1 - self.begin
    }

    pub fn to_annotation(&self, class_names: &[String]) -> StrokeAnnotation {
        let label = class_names.get(self.label).cloned().unwrap_or_else(|| self.label.to_string());
        StrokeAnnotation {
            begin: self.begin,
            end: self.end,
            label,
            score: Some(self.confidence),
        }
    }
}

macro_rules! named_enum {
    ($name:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn as_str(&self) -> &'static str {
                match self { $($name::$variant => $text),+ }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.pad(self.as_str())
            }
        }

        impl FromStr for $name {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                match s {
                    $($text => Ok($name::$variant),)+
                    other => Err(Error::config(format!(
                        concat!("unknown ", stringify!($name), " {:?}; expected one of: {}"),
                        other,
                        [$($text),+].join(", ")
                    ))),
                }
            }
        }
    };
}

/// How window outputs are combined.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Fusion {
    /// One centered window.
    NoWindow,
    /// Majority of window argmaxes.
    Vote,
    /// Unweighted mean of window probabilities.
    Mean,
    /// Mean weighted by a Gaussian of the window-center distance.
    Gaussian,
}

named_enum!(Fusion { NoWindow => "no_window", Vote => "vote", Mean => "mean", Gaussian => "gaussian" });

/// Per-frame stroke rule.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Decision {
    /// Stroke when some other class scores strictly above the negative class.
    NegVsAll,
    /// Stroke when the other classes together outweigh the negative class.
    NegVsSum,
}

named_enum!(Decision { NegVsAll => "neg_vs_all", NegVsSum => "neg_vs_sum" });

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DetectMode {
    Sliding,
    Proposals,
}

named_enum!(DetectMode { Sliding => "sliding", Proposals => "proposals" });

#[derive(Clone, Debug, PartialEq)]
pub struct DetectionConfig {
    pub fusion: Fusion,
    pub sigma: f64,
    pub decision: Decision,
    pub negative_index: usize,
    pub min_len: usize,
    pub proposal_len: usize,
    pub mode: DetectMode,
    /// Windows per forward pass.
    pub batch_size: usize,
}

impl Default for DetectionConfig {
    fn default() -> Self {
        Self {
            fusion: Fusion::Gaussian,
            sigma: 16.0,
            decision: Decision::NegVsAll,
            negative_index: 0,
            min_len: 30,
            proposal_len: 150,
            mode: DetectMode::Sliding,
            batch_size: 8,
        }
    }
}

impl DetectionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0) {
            return Err(Error::config(format!("sigma must be positive, got {}", self.sigma)));
        }
        if self.min_len == 0 {
            return Err(Error::config("min segment length must be at least 1"));
        }
        if self.batch_size == 0 {
            return Err(Error::config("batch size must be at least 1"));
        }
        Ok(())
    }
}

/// Softmax outputs of consecutive windows.
#[derive(Clone, Debug, PartialEq)]
pub struct ScoreTimeline {
    pub window_starts: Vec<usize>,
    pub scores: Vec<Vec<f64>>,
    pub window_len: usize,
    pub frame_count: usize,
}

impl ScoreTimeline {
    pub fn num_classes(&self) -> usize {
        self.scores.first().map_or(0, Vec::len)
    }

    pub fn window_center(&self, w: usize) -> f64 {
        self.window_starts[w] as f64 + (self.window_len as f64 - 1.0) / 2.0
    }
}

fn check_frame_size<C: Classifier + ?Sized>(model: &C, video: &RawVideo) -> Result<()> {
    let [c, _, h, w] = model.input_shape();
    if c != 3 || (h, w) != (video.height(), video.width()) {
        return Err(Error::dim(format!(
            "model expects {c}x{h}x{w} frames, video is 3x{}x{}",
            video.height(),
            video.width()
        )));
    }
    Ok(())
}

/// Probabilities of the windows starting at each of `starts`.
fn score_windows<C: Classifier + ?Sized>(
    model: &C,
    video: &RawVideo,
    starts: &[usize],
    batch_size: usize,
) -> Result<Vec<Vec<f64>>> {
    check_frame_size(model, video)?;
    let len = model.clip_len();
    let mut out = Vec::with_capacity(starts.len());
    for chunk in starts.chunks(batch_size.max(1)) {
        let clips = chunk
            .iter()
            .map(|&s| clip_tensor(video, s, len))
            .collect::<Result<Vec<_>>>()?;
        out.extend(model.probabilities(&Tensor::stack(&clips)?)?);
    }
    Ok(out)
}

/// Scores every window of the video with stride 1.
pub fn slide_window_scores<C: Classifier + ?Sized>(model: &C, video: &RawVideo, batch_size: usize) -> Result<ScoreTimeline> {
    let len = model.clip_len();
    let f = video.frame_count();
    if f < len {
        return Err(Error::Extraction(format!("video has {f} frames, windows need {len}")));
    }
    let starts: Vec<usize> = (0..=f - len).collect();
    let scores = score_windows(model, video, &starts, batch_size)?;
    Ok(ScoreTimeline {
        window_starts: starts,
        scores,
        window_len: len,
        frame_count: f,
    })
}

/// `exp(−d²/2σ²)`.
pub fn gaussian_weight(d: f64, sigma: f64) -> f64 {
    (-d * d / (2.0 * sigma * sigma)).exp()
}

/// Weighted combination of window vectors; `None` weights mean a vote.
fn combine(vectors: &[&[f64]], weights: Option<&[f64]>, k: usize) -> Vec<f64> {
    let mut acc = vec![0.0; k];
    match weights {
        None => {
            for v in vectors {
                acc[argmax(v)] += 1.0;
            }
        }
        Some(ws) => {
            for (v, &w) in vectors.iter().zip(ws) {
                for (a, &p) in acc.iter_mut().zip(v.iter()) {
                    *a += w * p;
                }
            }
        }
    }
    let total: f64 = acc.iter().sum();
    acc.iter_mut().for_each(|a| *a /= total);
    acc
}

/// Result of classifying one trimmed region.
#[derive(Clone, Debug, PartialEq)]
pub struct TrimmedPrediction {
    pub label: usize,
    pub confidence: f64,
    /// Fused probabilities (vote histogram for [`Fusion::Vote`]).
    pub probs: Vec<f64>,
}

/// Fuses already-computed window scores over a region `[begin, end]`.
pub fn fuse_region(
    starts: &[usize],
    scores: &[Vec<f64>],
    window_len: usize,
    region: (usize, usize),
    fusion: Fusion,
    sigma: f64,
) -> Result<TrimmedPrediction> {
    let k = scores.first().map_or(0, Vec::len);
    if k == 0 {
        return Err(Error::State("no window scores to fuse".into()));
    }
    let center = (region.0 + region.1) as f64 / 2.0;
    let vectors: Vec<&[f64]> = scores.iter().map(Vec::as_slice).collect();
    let probs = match fusion {
        Fusion::NoWindow => {
            let s = clip_start(region.0, region.1, window_len, 0, region.1 + 1)?.max(region.0);
            let w = starts
                .iter()
                .position(|&x| x == s)
                .ok_or_else(|| Error::State(format!("no window starts at frame {s}")))?;
            scores[w].clone()
        }
        Fusion::Vote => combine(&vectors, None, k),
        Fusion::Mean => combine(&vectors, Some(&vec![1.0; vectors.len()]), k),
        Fusion::Gaussian => {
            let ws: Vec<f64> = starts
                .iter()
                .map(|&s| gaussian_weight(s as f64 + (window_len as f64 - 1.0) / 2.0 - center, sigma))
                .collect();
            combine(&vectors, Some(&ws), k)
        }
    };
    let label = argmax(&probs);
    Ok(TrimmedPrediction {
        label,
        confidence: probs[label],
        probs,
    })
}

/// Classifies the frames `[begin, end]` of a video as one stroke.
pub fn classify_trimmed<C: Classifier + ?Sized>(
    model: &C,
    video: &RawVideo,
    region: (usize, usize),
    fusion: Fusion,
    sigma: f64,
    batch_size: usize,
) -> Result<TrimmedPrediction> {
    let (begin, end) = region;
    let len = model.clip_len();
    if end < begin || end >= video.frame_count() {
        return Err(Error::Index(format!(
            "region [{begin}, {end}] is outside a {}-frame video",
            video.frame_count()
        )));
    }
    if end + 1 - begin < len {
        return Err(Error::Extraction(format!(
            "region [{begin}, {end}] is shorter than the {len}-frame window"
        )));
    }
    let starts: Vec<usize> = match fusion {
        Fusion::NoWindow => vec![clip_start(begin, end, len, 0, end + 1)?.max(begin)],
        _ => (begin..=end + 1 - len).collect(),
    };
    let scores = score_windows(model, video, &starts, batch_size)?;
    fuse_region(&starts, &scores, len, region, fusion, sigma)
}

/// Per-frame probability vectors for frames `0..frame_count`.
///
/// A frame's vector combines every window that covers it. With
/// [`Fusion::NoWindow`] each frame takes the window centered on it
/// (clamped at the video edges).
pub fn fuse_frame_scores(timeline: &ScoreTimeline, fusion: Fusion, sigma: f64) -> Result<Vec<Vec<f64>>> {
    let n = timeline.scores.len();
    let len = timeline.window_len;
    let f = timeline.frame_count;
    let k = timeline.num_classes();
    if n == 0 || n + len - 1 != f || timeline.window_starts.iter().enumerate().any(|(i, &s)| s != i) {
        return Err(Error::State(
            "frame fusion needs one window per start position covering the whole video".into(),
        ));
    }
    if !(sigma > 0.0) {
        return Err(Error::config(format!("sigma must be positive, got {sigma}")));
    }
    let mut frames = Vec::with_capacity(f);
    for frame in 0..f {
        let lo = frame.saturating_sub(len - 1);
        let hi = frame.min(n - 1);
        let vectors: Vec<&[f64]> = timeline.scores[lo..=hi].iter().map(Vec::as_slice).collect();
        let v = match fusion {
            Fusion::NoWindow => {
                let s = (frame as i64 - (len as i64 / 2 - 1)).clamp(0, n as i64 - 1) as usize;
                timeline.scores[s].clone()
            }
            Fusion::Vote => combine(&vectors, None, k),
            Fusion::Mean => combine(&vectors, Some(&vec![1.0; vectors.len()]), k),
            Fusion::Gaussian => {
                let ws: Vec<f64> = (lo..=hi)
                    .map(|w| gaussian_weight(frame as f64 - timeline.window_center(w), sigma))
                    .collect();
                combine(&vectors, Some(&ws), k)
            }
        };
        frames.push(v);
    }
    Ok(frames)
}

/// Whether a probability vector counts as a stroke, and its stroke score `1 − p_neg`.
pub fn decide(p: &[f64], decision: Decision, negative: usize) -> (bool, f64) {
    let neg = p[negative];
    let stroke = match decision {
        // Ties with the negative class count as background.
        Decision::NegVsAll => p.iter().enumerate().any(|(i, &v)| i != negative && v > neg),
        Decision::NegVsSum => {
            let others: f64 = p.iter().enumerate().filter(|&(i, _)| i != negative).map(|(_, &v)| v).sum();
            others > neg
        }
    };
    (stroke, 1.0 - neg)
}

/// Per-frame stroke mask and stroke score.
pub fn frame_decision(frames: &[Vec<f64>], decision: Decision, negative: usize) -> Result<(Vec<bool>, Vec<f64>)> {
    let k = frames.first().map_or(0, Vec::len);
    if frames.iter().any(|v| v.len() != k) {
        return Err(Error::dim("frame vectors have different lengths"));
    }
    if !frames.is_empty() && negative >= k {
        return Err(Error::config(format!("negative class {negative} is out of range for {k} classes")));
    }
    Ok(frames.iter().map(|p| decide(p, decision, negative)).unzip())
}

/// Maximal runs of stroke frames at least `min_len` long.
pub fn segments_from_frames(
    mask: &[bool],
    scores: &[f64],
    frames: &[Vec<f64>],
    negative: usize,
    min_len: usize,
) -> Vec<Segment> {
    let mut out = Vec::new();
    let mut t = 0;
    while t < mask.len() {
        if !mask[t] {
            t += 1;
            continue;
        }
        let begin = t;
        while t < mask.len() && mask[t] {
            t += 1;
        }
        let end = t - 1;
        if t - begin < min_len {
            continue;
        }
        let k = frames[begin].len();
        let mut mean = vec![0.0; k];
        for v in &frames[begin..=end] {
            for (m, &p) in mean.iter_mut().zip(v) {
                *m += p;
            }
        }
        let mut label = usize::MAX;
        for c in (0..k).filter(|&c| c != negative) {
            if label == usize::MAX || mean[c] > mean[label] {
                label = c;
            }
        }
        let confidence = scores[begin..=end].iter().sum::<f64>() / (t - begin) as f64;
        out.push(Segment::new(begin, end, label, confidence));
    }
    out
}

/// Non-overlapping `[i·len, (i+1)·len − 1]` slices; an incomplete tail is dropped.
pub fn proposal_candidates(frame_count: usize, proposal_len: usize) -> Vec<(usize, usize)> {
    if proposal_len == 0 {
        return Vec::new();
    }
    (0..frame_count / proposal_len)
        .map(|i| (i * proposal_len, (i + 1) * proposal_len - 1))
        .collect()
}

pub fn detect_video<C: Classifier + ?Sized>(model: &C, video: &RawVideo, cfg: &DetectionConfig) -> Result<Vec<Segment>> {
    cfg.validate()?;
    if cfg.negative_index >= model.num_classes() {
        return Err(Error::config(format!(
            "negative class {} is out of range for {} classes",
            cfg.negative_index,
            model.num_classes()
        )));
    }
    match cfg.mode {
        DetectMode::Sliding => {
            let timeline = slide_window_scores(model, video, cfg.batch_size)?;
            let frames = fuse_frame_scores(&timeline, cfg.fusion, cfg.sigma)?;
            let (mask, scores) = frame_decision(&frames, cfg.decision, cfg.negative_index)?;
            Ok(segments_from_frames(&mask, &scores, &frames, cfg.negative_index, cfg.min_len))
        }
        DetectMode::Proposals => {
            if cfg.proposal_len < model.clip_len() {
                return Err(Error::config(format!(
                    "proposal length {} is shorter than the {}-frame window",
                    cfg.proposal_len,
                    model.clip_len()
                )));
            }
            let mut out = Vec::new();
            for region in proposal_candidates(video.frame_count(), cfg.proposal_len) {
                let pred = classify_trimmed(model, video, region, cfg.fusion, cfg.sigma, cfg.batch_size)?;
                if pred.label != cfg.negative_index {
                    out.push(Segment::new(region.0, region.1, pred.label, 1.0 - pred.probs[cfg.negative_index]));
                }
            }
            Ok(out)
        }
    }
}

/// A segment tagged with its video.
#[derive(Clone, Debug, PartialEq)]
pub struct Detection {
    pub video: String,
    pub segment: Segment,
}

pub const DETECTIONS_HEADER: &str = "video_id,begin,end,label,score";

/// `video_id,begin,end,label,score` rows; scores with six decimals.
pub fn detections_csv(detections: &[Detection], class_names: &[String]) -> String {
    let mut out = format!("{DETECTIONS_HEADER}\n");
    for d in detections {
        let s = &d.segment;
        let label = class_names.get(s.label).map_or_else(|| s.label.to_string(), Clone::clone);
        let _ = writeln!(out, "{},{},{},{},{:.6}", d.video, s.begin, s.end, label, s.confidence);
    }
    out
}

pub fn parse_detections_csv(text: &str, class_names: &[String]) -> Result<Vec<Detection>> {
    let mut lines = text.lines().enumerate();
    if lines.next().map(|(_, h)| h.trim()) != Some(DETECTIONS_HEADER) {
        return Err(Error::Parse {
            line: 1,
            message: format!("expected header `{DETECTIONS_HEADER}`"),
        });
    }
    let mut out = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let bad = |message: String| Error::Parse { line: i + 1, message };
        let cols: Vec<&str> = line.split(',').collect();
        let [video, begin, end, label, score] = cols[..] else {
            return Err(bad(format!("expected 5 columns, found {}", cols.len())));
        };
        let int = |s: &str| s.parse::<usize>().map_err(|_| bad(format!("bad frame index {s:?}")));
        let (begin, end) = (int(begin)?, int(end)?);
        if begin > end {
            return Err(bad(format!("begin {begin} is after end {end}")));
        }
        let label = class_names
            .iter()
            .position(|c| c == label)
            .ok_or_else(|| bad(format!("unknown class {label:?}")))?;
        let confidence = score.parse().map_err(|_| bad(format!("bad score {score:?}")))?;
        out.push(Detection {
            video: video.to_string(),
            segment: Segment::new(begin, end, label, confidence),
        });
    }
    Ok(out)
}
