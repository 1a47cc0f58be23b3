//! Split manifests and labeled clip collections.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use super::annotation::{parse_annotation_xml, StrokeAnnotation};
use super::clip::{clip_start, clip_tensor, mine_negative_segments, Clip, NEGATIVE_LABEL};
use super::video::{read_raw_video, resize_frames, RawVideo};
use crate::error::{Error, Result};
use crate::tensor::Tensor;

pub const MANIFEST_FILE: &str = "manifest.tsv";
pub const CLASSES_FILE: &str = "classes.txt";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Split {
    Train,
    Validation,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Validation, Split::Test];
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            Split::Train => "train",
            Split::Validation => "validation",
            Split::Test => "test",
        })
    }
}

impl FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Split::Train),
            "validation" => Ok(Split::Validation),
            "test" => Ok(Split::Test),
            other => Err(Error::config(format!("unknown split {other:?}"))),
        }
    }
}

/// One manifest line; paths are relative to the manifest's directory unless absolute.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ManifestEntry {
    pub video: PathBuf,
    pub annotation: PathBuf,
    pub split: Split,
}

pub fn write_manifest(entries: &[ManifestEntry], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut text = String::new();
    for e in entries {
        text.push_str(&format!("{}\t{}\t{}\n", e.video.display(), e.annotation.display(), e.split));
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn parse_manifest(text: &str) -> Result<Vec<ManifestEntry>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        let [video, annotation, split] = cols[..] else {
            return Err(Error::Parse {
                line: i + 1,
                message: format!("expected 3 tab-separated columns, found {}", cols.len()),
            });
        };
        let split = split.trim().parse().map_err(|e: Error| Error::Parse {
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push(ManifestEntry {
            video: video.into(),
            annotation: annotation.into(),
            split,
        });
    }
    Ok(out)
}

pub fn read_manifest(path: impl AsRef<Path>) -> Result<Vec<ManifestEntry>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_manifest(&text)
}

pub fn read_class_names(path: impl AsRef<Path>) -> Result<Vec<String>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let names: Vec<String> = text.lines().map(str::trim).filter(|l| !l.is_empty()).map(String::from).collect();
    if names.len() < 2 {
        return Err(Error::config(format!("{} lists fewer than two classes", path.display())));
    }
    Ok(names)
}

/// A decoded video with its ground truth.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledVideo {
    pub id: String,
    pub split: Split,
    pub video: RawVideo,
    pub annotations: Vec<StrokeAnnotation>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub class_names: Vec<String>,
    pub videos: Vec<LabeledVideo>,
}

impl Dataset {
    /// Loads a dataset directory (manifest plus class list), resizing frames to `frame_size` = (H, W).
    pub fn load(root: impl AsRef<Path>, frame_size: Option<(usize, usize)>) -> Result<Self> {
        Self::load_where(root.as_ref(), frame_size, |_| true)
    }

    /// Like [`Dataset::load`], reading only the videos of one split.
    pub fn load_split(root: impl AsRef<Path>, frame_size: Option<(usize, usize)>, split: Split) -> Result<Self> {
        Self::load_where(root.as_ref(), frame_size, |s| s == split)
    }

    /// Class names plus every video's id, split and strokes, without decoding any frames.
    pub fn load_annotations(root: impl AsRef<Path>) -> Result<(Vec<String>, Vec<(String, Split, Vec<StrokeAnnotation>)>)> {
        let root = root.as_ref();
        let class_names = read_class_names(root.join(CLASSES_FILE))?;
        let mut out = Vec::new();
        for entry in read_manifest(root.join(MANIFEST_FILE))? {
            let ann_path = root.join(&entry.annotation);
            let text = fs::read_to_string(&ann_path).map_err(|e| Error::io(&ann_path, e))?;
            let (id, annotations) = parse_annotation_xml(&text)?;
            out.push((id, entry.split, annotations));
        }
        Ok((class_names, out))
    }

    fn load_where(root: &Path, frame_size: Option<(usize, usize)>, keep: impl Fn(Split) -> bool) -> Result<Self> {
        let class_names = read_class_names(root.join(CLASSES_FILE))?;
        let mut videos = Vec::new();
        for entry in read_manifest(root.join(MANIFEST_FILE))?.into_iter().filter(|e| keep(e.split)) {
            let ann_path = root.join(&entry.annotation);
            let text = fs::read_to_string(&ann_path).map_err(|e| Error::io(&ann_path, e))?;
            let (id, annotations) = parse_annotation_xml(&text)?;
            let mut video = read_raw_video(root.join(&entry.video))?;
            if let Some(last) = annotations.last() {
                if last.end >= video.frame_count() {
                    return Err(Error::Format(format!(
                        "{id}: annotation ends at frame {} but the video has {} frames",
                        last.end,
                        video.frame_count()
                    )));
                }
            }
            if let Some((h, w)) = frame_size {
                if (h, w) != (video.height(), video.width()) {
                    if w > video.width() || h > video.height() {
                        return Err(Error::config(format!(
                            "{id}: cannot upscale {}x{} frames to {w}x{h}",
                            video.width(),
                            video.height()
                        )));
                    }
                    video = resize_frames(&video, w, h)?;
                }
            }
            videos.push(LabeledVideo {
                id,
                split: entry.split,
                video,
                annotations,
            });
        }
        Ok(Self { class_names, videos })
    }

    pub fn class_index(&self, name: &str) -> Result<usize> {
        class_index(&self.class_names, name)
    }

    pub fn negative_index(&self) -> Option<usize> {
        self.class_names.iter().position(|c| c == NEGATIVE_LABEL)
    }

    pub fn split(&self, split: Split) -> impl Iterator<Item = &LabeledVideo> {
        self.videos.iter().filter(move |v| v.split == split)
    }
}

pub fn class_index(class_names: &[String], name: &str) -> Result<usize> {
    class_names
        .iter()
        .position(|c| c == name)
        .ok_or_else(|| Error::config(format!("label {name:?} is not in the class list")))
}

/// A labeled interval inside one of a [`ClipSet`]'s videos.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClipItem {
    pub video: usize,
    pub begin: usize,
    pub end: usize,
    pub label: usize,
}

/// Trimmed samples (strokes and mined negatives) over shared videos.
#[derive(Clone, Debug, PartialEq)]
pub struct ClipSet {
    pub clip_len: usize,
    pub video_ids: Vec<String>,
    pub videos: Vec<RawVideo>,
    pub items: Vec<ClipItem>,
}

impl ClipSet {
    /// Collects every annotated stroke of `videos` plus up to
    /// `negatives_per_video` mined background intervals per video.
    pub fn from_videos<'a>(
        videos: impl IntoIterator<Item = &'a LabeledVideo>,
        class_names: &[String],
        clip_len: usize,
        negatives_per_video: usize,
        seed: u64,
    ) -> Result<Self> {
        let negative = class_names.iter().position(|c| c == NEGATIVE_LABEL);
        if negatives_per_video > 0 && negative.is_none() {
            return Err(Error::config("negative mining needs a `negative` class"));
        }
        let mut set = ClipSet {
            clip_len,
            video_ids: Vec::new(),
            videos: Vec::new(),
            items: Vec::new(),
        };
        for (vi, lv) in videos.into_iter().enumerate() {
            if lv.video.frame_count() < clip_len {
                return Err(Error::Extraction(format!(
                    "{}: {} frames is shorter than the clip length {clip_len}",
                    lv.id,
                    lv.video.frame_count()
                )));
            }
            for a in &lv.annotations {
                set.items.push(ClipItem {
                    video: vi,
                    begin: a.begin,
                    end: a.end,
                    label: class_index(class_names, &a.label)?,
                });
            }
            if let Some(neg) = negative {
                let mined = mine_negative_segments(
                    lv.video.frame_count(),
                    &lv.annotations,
                    negatives_per_video,
                    clip_len,
                    seed ^ (vi as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15),
                );
                set.items.extend(mined.into_iter().map(|m| ClipItem {
                    video: vi,
                    begin: m.begin,
                    end: m.end,
                    label: neg,
                }));
            }
            set.video_ids.push(lv.id.clone());
            set.videos.push(lv.video.clone());
        }
        Ok(set)
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn labels(&self) -> Vec<usize> {
        self.items.iter().map(|i| i.label).collect()
    }

    /// How far a clip may shift either way while staying inside its interval.
    pub fn slack(&self, i: usize) -> i64 {
        let item = &self.items[i];
        ((item.end + 1 - item.begin) as i64 - self.clip_len as i64).max(0) / 2
    }

    pub fn clip(&self, i: usize, jitter: i64) -> Result<Clip> {
        let item = &self.items[i];
        let video = &self.videos[item.video];
        let start = clip_start(item.begin, item.end, self.clip_len, jitter, video.frame_count())?;
        Ok(Clip {
            tensor: clip_tensor(video, start, self.clip_len)?,
            label: item.label,
            video: self.video_ids[item.video].clone(),
            start,
        })
    }

    /// Stacks clips into a `[B, 3, T, H, W]` batch plus their labels.
    pub fn batch(clips: &[Clip]) -> Result<(Tensor<f32>, Vec<usize>)> {
        let tensors: Vec<Tensor<f32>> = clips.iter().map(|c| c.tensor.clone()).collect();
        Ok((Tensor::stack(&tensors)?, clips.iter().map(|c| c.label).collect()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::synth::{synth_dataset, SynthConfig};

    #[test]
    fn manifest_round_trip() {
        let entries = vec![
            ManifestEntry {
                video: "videos/a.rvid".into(),
                annotation: "annotations/a.xml".into(),
                split: Split::Train,
            },
            ManifestEntry {
                video: "/abs/b.rvid".into(),
                annotation: "b.xml".into(),
                split: Split::Test,
            },
        ];
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.tsv");
        write_manifest(&entries, &p).unwrap();
        assert_eq!(read_manifest(&p).unwrap(), entries);
    }

    #[test]
    fn bad_manifest_lines() {
        assert!(matches!(parse_manifest("a\tb\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_manifest("\na\tb\tdev\n"), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn synthetic_dataset_loads_into_clips() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = SynthConfig {
            videos: [2, 1, 0],
            width: 16,
            height: 12,
            ..Default::default()
        };
        synth_dataset(&cfg, dir.path()).unwrap();
        let ds = Dataset::load(dir.path(), Some((6, 8))).unwrap();
        assert_eq!(ds.videos.len(), 3);
        assert_eq!(ds.negative_index(), Some(0));
        assert_eq!((ds.videos[0].video.width(), ds.videos[0].video.height()), (8, 6));

        let set = ClipSet::from_videos(ds.split(Split::Train), &ds.class_names, 16, 1, 5).unwrap();
        assert_eq!(set.len(), 2 * 4 + 2);
        assert_eq!(set.labels().iter().filter(|&&l| l == 0).count(), 2);
        let c = set.clip(0, 0).unwrap();
        assert_eq!(c.tensor.shape(), &[3, 16, 6, 8]);
        let (batch, labels) = ClipSet::batch(&[c.clone(), c]).unwrap();
        assert_eq!(batch.shape(), &[2, 3, 16, 6, 8]);
        assert_eq!(labels.len(), 2);
    }
}
