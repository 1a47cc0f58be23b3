//! INI-style experiment settings.
//!
//! ```ini
//! [experiment]
//! seed = 3
//!
//! [model]
//! arch = v2
//! channels = 8, 16
//!
//! [train]
//! epochs = 200   # comments run to the end of the line
//! ```
//!
//! Precedence: command-line overrides, then the file, then defaults.
//! Unknown sections and keys are rejected.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::data::{Split, SynthConfig};
use crate::detect::{Decision, DetectMode, DetectionConfig, Fusion};
use crate::error::{Error, Result};
use crate::eval::DEFAULT_IOU_THRESHOLD;
use crate::model::{Arch, NetworkSpec, DEFAULT_HIDDEN_FC, DEFAULT_INPUT, V1_CHANNELS, V2_CHANNELS};
use crate::train::TrainConfig;

#[derive(Clone, Debug, PartialEq)]
pub struct ModelConfig {
    pub arch: Arch,
    /// `None` selects the architecture's default plan.
    pub channels: Option<Vec<usize>>,
    pub hidden_fc: usize,
    pub clip_len: usize,
    /// Frame size; `None` keeps the dataset's own size.
    pub height: Option<usize>,
    pub width: Option<usize>,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            arch: Arch::V2,
            channels: None,
            hidden_fc: DEFAULT_HIDDEN_FC,
            clip_len: DEFAULT_INPUT[1],
            height: None,
            width: None,
        }
    }
}

impl ModelConfig {
    pub fn channel_plan(&self) -> Vec<usize> {
        self.channels.clone().unwrap_or_else(|| match self.arch {
            Arch::V1 => V1_CHANNELS.to_vec(),
            Arch::V2 => V2_CHANNELS.to_vec(),
        })
    }

    /// Network for frames of `frame_size` = (H, W) and `num_classes` outputs.
    pub fn network(&self, frame_size: (usize, usize), num_classes: usize) -> Result<NetworkSpec> {
        let (h, w) = (self.height.unwrap_or(frame_size.0), self.width.unwrap_or(frame_size.1));
        let input = [3, self.clip_len, h, w];
        let spec = match self.arch {
            Arch::V1 => NetworkSpec::v1(input, &self.channel_plan(), num_classes)?,
            Arch::V2 => NetworkSpec::v2(input, &self.channel_plan(), num_classes)?,
        };
        spec.with_hidden_fc(self.hidden_fc)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub dataset: Option<PathBuf>,
    pub checkpoint: Option<PathBuf>,
    pub output: Option<PathBuf>,
    /// Predictions or detections file read by the evaluation commands.
    pub input: Option<PathBuf>,
    pub split: Split,
    pub model: ModelConfig,
    pub train: TrainConfig,
    /// Background clips mined per video for training and validation.
    pub negatives_per_video: usize,
    pub detect: DetectionConfig,
    pub synth: SynthConfig,
    /// Minimum temporal IoU for a detection to match a stroke.
    pub iou_threshold: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            dataset: None,
            checkpoint: None,
            output: None,
            input: None,
            split: Split::Test,
            model: ModelConfig::default(),
            train: TrainConfig::default(),
            negatives_per_video: 1,
            detect: DetectionConfig::default(),
            synth: SynthConfig::default(),
            iou_threshold: DEFAULT_IOU_THRESHOLD,
        }
    }
}

/// Sections whose keys are recorded for provenance but not interpreted.
const PASSIVE_SECTIONS: &[&str] = &["run"];

fn parse_value<T: FromStr>(value: &str, what: &str) -> std::result::Result<T, String> {
    value.parse().map_err(|_| format!("expected {what}, got {value:?}"))
}

fn parse_bool(value: &str) -> std::result::Result<bool, String> {
    match value {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(format!("expected true or false, got {value:?}")),
    }
}

fn parse_list(value: &str) -> std::result::Result<Vec<usize>, String> {
    value
        .split(',')
        .map(|v| parse_value::<usize>(v.trim(), "a comma-separated list of non-negative integers"))
        .collect()
}

fn optional<T>(value: &str, f: impl Fn(&str) -> std::result::Result<T, String>) -> std::result::Result<Option<T>, String> {
    if value.is_empty() || value == "auto" {
        Ok(None)
    } else {
        f(value).map(Some)
    }
}

fn path(value: &str) -> Option<PathBuf> {
    (!value.is_empty()).then(|| PathBuf::from(value))
}

impl ExperimentConfig {
    /// Applies one `section.key = value` setting.
    pub fn set(&mut self, section: &str, key: &str, value: &str) -> std::result::Result<(), String> {
        let value = value.trim();
        let int = |what| parse_value::<usize>(value, what);
        let num = || parse_value::<f64>(value, "a number");
        let nonneg = "a non-negative integer";
        match (section, key) {
            ("experiment", "seed") => self.seed = parse_value(value, nonneg)?,
            ("experiment", "dataset") => self.dataset = path(value),
            ("experiment", "checkpoint") => self.checkpoint = path(value),
            ("experiment", "output") => self.output = path(value),
            ("experiment", "input") => self.input = path(value),
            ("experiment", "split") => self.split = value.parse().map_err(|e: Error| e.to_string())?,

            ("model", "arch") => self.model.arch = value.parse().map_err(|e: Error| e.to_string())?,
            ("model", "channels") => self.model.channels = optional(value, parse_list)?,
            ("model", "hidden_fc") => self.model.hidden_fc = int(nonneg)?,
            ("model", "clip_len") => self.model.clip_len = int(nonneg)?,
            ("model", "height") => self.model.height = optional(value, |v| parse_value(v, nonneg))?,
            ("model", "width") => self.model.width = optional(value, |v| parse_value(v, nonneg))?,

            ("train", "epochs") => self.train.epochs = int(nonneg)?,
            ("train", "lr") => self.train.lr = num()?,
            ("train", "momentum") => self.train.momentum = num()?,
            ("train", "weight_decay") => self.train.weight_decay = num()?,
            ("train", "batch_size") => self.train.batch_size = int(nonneg)?,
            ("train", "plateau_patience") => self.train.plateau_patience = int(nonneg)?,
            ("train", "plateau_factor") => self.train.plateau_factor = num()?,
            ("train", "min_lr") => self.train.min_lr = num()?,
            ("train", "augment") => self.train.augment = parse_bool(value)?,
            ("train", "jitter") => self.train.jitter = parse_bool(value)?,
            ("train", "negatives_per_video") => self.negatives_per_video = int(nonneg)?,

            ("detect", "fusion") => self.detect.fusion = value.parse::<Fusion>().map_err(|e| e.to_string())?,
            ("detect", "sigma") => self.detect.sigma = num()?,
            ("detect", "decision") => self.detect.decision = value.parse::<Decision>().map_err(|e| e.to_string())?,
            ("detect", "min_len") => self.detect.min_len = int(nonneg)?,
            ("detect", "proposal_len") => self.detect.proposal_len = int(nonneg)?,
            ("detect", "mode") => self.detect.mode = value.parse::<DetectMode>().map_err(|e| e.to_string())?,
            ("detect", "batch_size") => self.detect.batch_size = int(nonneg)?,

            ("synth", "num_classes") => self.synth.num_classes = int(nonneg)?,
            ("synth", "train_videos") => self.synth.videos[0] = int(nonneg)?,
            ("synth", "validation_videos") => self.synth.videos[1] = int(nonneg)?,
            ("synth", "test_videos") => self.synth.videos[2] = int(nonneg)?,
            ("synth", "width") => self.synth.width = int(nonneg)?,
            ("synth", "height") => self.synth.height = int(nonneg)?,
            ("synth", "strokes_per_video") => self.synth.strokes_per_video = int(nonneg)?,
            ("synth", "min_stroke_len") => self.synth.stroke_len.0 = int(nonneg)?,
            ("synth", "max_stroke_len") => self.synth.stroke_len.1 = int(nonneg)?,
            ("synth", "min_gap") => self.synth.gap_len.0 = int(nonneg)?,
            ("synth", "max_gap") => self.synth.gap_len.1 = int(nonneg)?,
            ("synth", "noise") => self.synth.noise = parse_value(value, "an integer in 0..=255")?,

            ("eval", "iou_threshold") => self.iou_threshold = num()?,

            (s, _) if PASSIVE_SECTIONS.contains(&s) => {}
            _ => return Err("unknown setting".into()),
        }
        Ok(())
    }

    /// Range checks that do not depend on the file system.
    pub fn validate(&self) -> std::result::Result<(), (String, String)> {
        let fail = |k: &str, m: String| Err((k.to_string(), m));
        if let Err(e) = self.train.validate() {
            return fail("train", e.to_string());
        }
        if let Err(e) = self.detect.validate() {
            return fail("detect", e.to_string());
        }
        if let Err(e) = self.synth.validate() {
            return fail("synth", e.to_string());
        }
        if !(self.iou_threshold > 0.0 && self.iou_threshold <= 1.0) {
            return fail("eval.iou_threshold", "must lie in (0, 1]".into());
        }
        if self.model.clip_len == 0 {
            return fail("model.clip_len", "must be at least 1".into());
        }
        if self.model.hidden_fc == 0 {
            return fail("model.hidden_fc", "must be at least 1".into());
        }
        if self.model.channels.as_ref().is_some_and(|c| c.is_empty() || c.contains(&0)) {
            return fail("model.channels", "needs at least one positive entry".into());
        }
        Ok(())
    }

    /// Applies `section.key=value` overrides, reporting them as line 0.
    pub fn apply_overrides<'a>(&mut self, overrides: impl IntoIterator<Item = &'a str>) -> Result<()> {
        for item in overrides {
            let (lhs, value) = item.split_once('=').ok_or_else(|| Error::Settings {
                key: item.to_string(),
                line: 0,
                message: "expected section.key=value".into(),
            })?;
            let (section, key) = lhs.trim().split_once('.').ok_or_else(|| Error::Settings {
                key: lhs.trim().to_string(),
                line: 0,
                message: "expected section.key".into(),
            })?;
            self.set(section, key, value).map_err(|message| Error::Settings {
                key: lhs.trim().to_string(),
                line: 0,
                message,
            })?;
        }
        self.validate().map_err(|(key, message)| Error::Settings { key, line: 0, message })
    }

    pub fn dump(&self) -> String {
        let mut out = String::new();
        let mut section = |name: &str, rows: Vec<(&str, String)>| {
            let _ = writeln!(out, "[{name}]");
            for (k, v) in rows {
                let _ = writeln!(out, "{k} = {v}");
            }
            out.push('\n');
        };
        let opt_path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string()).unwrap_or_default();
        let opt = |v: Option<usize>| v.map_or_else(|| "auto".to_string(), |v| v.to_string());
        section(
            "experiment",
            vec![
                ("seed", self.seed.to_string()),
                ("dataset", opt_path(&self.dataset)),
                ("checkpoint", opt_path(&self.checkpoint)),
                ("output", opt_path(&self.output)),
                ("input", opt_path(&self.input)),
                ("split", self.split.to_string()),
            ],
        );
        let m = &self.model;
        section(
            "model",
            vec![
                ("arch", m.arch.to_string()),
                (
                    "channels",
                    m.channels.as_ref().map_or_else(
                        || "auto".to_string(),
                        |c| c.iter().map(usize::to_string).collect::<Vec<_>>().join(","),
                    ),
                ),
                ("hidden_fc", m.hidden_fc.to_string()),
                ("clip_len", m.clip_len.to_string()),
                ("height", opt(m.height)),
                ("width", opt(m.width)),
            ],
        );
        let t = &self.train;
        section(
            "train",
            vec![
                ("epochs", t.epochs.to_string()),
                ("lr", t.lr.to_string()),
                ("momentum", t.momentum.to_string()),
                ("weight_decay", t.weight_decay.to_string()),
                ("batch_size", t.batch_size.to_string()),
                ("plateau_patience", t.plateau_patience.to_string()),
                ("plateau_factor", t.plateau_factor.to_string()),
                ("min_lr", t.min_lr.to_string()),
                ("augment", t.augment.to_string()),
                ("jitter", t.jitter.to_string()),
                ("negatives_per_video", self.negatives_per_video.to_string()),
            ],
        );
        let d = &self.detect;
        section(
            "detect",
            vec![
                ("fusion", d.fusion.to_string()),
                ("sigma", d.sigma.to_string()),
                ("decision", d.decision.to_string()),
                ("min_len", d.min_len.to_string()),
                ("proposal_len", d.proposal_len.to_string()),
                ("mode", d.mode.to_string()),
                ("batch_size", d.batch_size.to_string()),
            ],
        );
        let s = &self.synth;
        section(
            "synth",
            vec![
                ("num_classes", s.num_classes.to_string()),
                ("train_videos", s.videos[0].to_string()),
                ("validation_videos", s.videos[1].to_string()),
                ("test_videos", s.videos[2].to_string()),
                ("width", s.width.to_string()),
                ("height", s.height.to_string()),
                ("strokes_per_video", s.strokes_per_video.to_string()),
                ("min_stroke_len", s.stroke_len.0.to_string()),
                ("max_stroke_len", s.stroke_len.1.to_string()),
                ("min_gap", s.gap_len.0.to_string()),
                ("max_gap", s.gap_len.1.to_string()),
                ("noise", s.noise.to_string()),
            ],
        );
        section("eval", vec![("iou_threshold", self.iou_threshold.to_string())]);
        out.pop();
        out
    }
}

pub fn parse_config_str(text: &str) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::default();
    let mut section: Option<String> = None;
    let mut first_line = std::collections::HashMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let name = name.strip_suffix(']').ok_or_else(|| Error::Settings {
                key: line.to_string(),
                line: line_no,
                message: "unterminated section header".into(),
            })?;
            section = Some(name.trim().to_string());
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::Settings {
            key: line.to_string(),
            line: line_no,
            message: "expected `key = value`".into(),
        })?;
        let key = key.trim();
        let sec = section.as_deref().ok_or_else(|| Error::Settings {
            key: key.to_string(),
            line: line_no,
            message: "setting appears before any [section]".into(),
        })?;
        let full = format!("{sec}.{key}");
        cfg.set(sec, key, value).map_err(|message| Error::Settings {
            key: full.clone(),
            line: line_no,
            message,
        })?;
        first_line.entry(sec.to_string()).or_insert(line_no);
        first_line.entry(full).or_insert(line_no);
    }
    cfg.validate().map_err(|(key, message)| {
        let line = first_line.get(&key).or_else(|| first_line.get(key.split('.').next().unwrap_or(""))).copied();
        Error::Settings {
            key,
            line: line.unwrap_or(0),
            message,
        }
    })?;
    Ok(cfg)
}

pub fn parse_config(path: impl AsRef<Path>) -> Result<ExperimentConfig> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config_str(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let cfg = parse_config_str("").unwrap();
        assert_eq!(cfg, ExperimentConfig::default());
        assert_eq!(cfg.model.arch, Arch::V2);
        assert_eq!(cfg.train.epochs, 2000);
        assert_eq!(cfg.train.lr, 1e-4);
        assert_eq!(cfg.train.momentum, 0.5);
        assert_eq!(cfg.train.weight_decay, 0.005);
    }

    #[test]
    fn negative_epochs_are_rejected() {
        match parse_config_str("[train]\n\nepochs = -1\n") {
            Err(Error::Settings { key, line, .. }) => {
                assert_eq!(key, "train.epochs");
                assert_eq!(line, 3);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_keys_and_sections() {
        assert!(matches!(
            parse_config_str("[train]\nepoch = 3\n"),
            Err(Error::Settings { line: 2, .. })
        ));
        assert!(parse_config_str("[nope]\nx = 1\n").is_err());
        assert!(parse_config_str("seed = 1\n").is_err());
        assert!(parse_config_str("[train\n").is_err());
    }

    #[test]
    fn range_errors_name_their_line() {
        match parse_config_str("[train]\nlr = 0.1\nplateau_factor = 2\n") {
            Err(Error::Settings { key, line, .. }) => assert_eq!((key.as_str(), line), ("train", 2)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn dump_round_trips() {
        let text = "[experiment]\nseed = 9 # trailing\ndataset = d\n[model]\narch = v1\nchannels = 4,8\nheight = 32\n\
                    [train]\nepochs = 7\nlr = 0.003\naugment = false\n[detect]\nfusion = vote\ndecision = neg_vs_sum\n\
                    mode = proposals\n[eval]\niou_threshold = 0.3\n[synth]\nnum_classes = 3\nwidth = 40\n[run]\ncommand = train\n";
        let cfg = parse_config_str(text).unwrap();
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.model.channels, Some(vec![4, 8]));
        assert_eq!(cfg.detect.fusion, Fusion::Vote);
        assert_eq!(parse_config_str(&cfg.dump()).unwrap(), cfg);
        let d = ExperimentConfig::default();
        assert_eq!(parse_config_str(&d.dump()).unwrap(), d);
    }

    #[test]
    fn overrides_win() {
        let mut cfg = parse_config_str("[train]\nepochs = 7\n").unwrap();
        cfg.apply_overrides(["train.epochs=3", "model.arch = v1"]).unwrap();
        assert_eq!(cfg.train.epochs, 3);
        assert_eq!(cfg.model.arch, Arch::V1);
        assert!(cfg.apply_overrides(["train.bogus=1"]).is_err());
        assert!(cfg.apply_overrides(["epochs=1"]).is_err());
    }

    #[test]
    fn network_from_model_section() {
        let m = ModelConfig {
            channels: Some(vec![8, 16]),
            clip_len: 16,
            ..Default::default()
        };
        let spec = m.network((32, 32), 5).unwrap();
        assert_eq!(spec.input_shape, [3, 16, 32, 32]);
        assert_eq!(spec.num_classes, 5);
    }
}
