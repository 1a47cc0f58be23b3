//! Command-line front end.
//!
//! Every subcommand reads an optional `--config` file, then applies
//! `--set section.key=value` overrides, then its own flags. Commands that
//! write artifacts also write [`RUN_MANIFEST_FILE`], a config snapshot that
//! replays the run via `--config`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::config::{parse_config, ExperimentConfig};
use crate::data::{clip_start, synth_dataset, write_annotation_xml, Dataset, Split};
use crate::detect::{classify_trimmed, detect_video, detections_csv, parse_detections_csv, Detection, Segment};
use crate::error::{Error, Result};
use crate::eval::{by_video, confusion_matrix, global_frame_iou, mean_ap, write_report, EvalReport};
use crate::model::{load_checkpoint, save_checkpoint, Classifier, Model};
use crate::train::{train, write_stats_csv, STATS_HEADER};

pub const RUN_MANIFEST_FILE: &str = "run.ini";
pub const CHECKPOINT_FILE: &str = "model.ckpt";
pub const STATS_FILE: &str = "stats.csv";
pub const PREDICTIONS_FILE: &str = "predictions.csv";
pub const DETECTIONS_FILE: &str = "detections.csv";
pub const PREDICTIONS_HEADER: &str = "video_id,begin,end,truth,prediction,confidence";
/// Caps the worker threads used for convolution and window scoring.
pub const THREADS_ENV: &str = "STROKEBENCH_THREADS";

#[derive(Parser, Debug)]
#[command(name = "strokebench", version, about = "Table-tennis stroke classification and detection with 3D CNNs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default)]
struct Common {
    /// INI settings file.
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Override one setting, e.g. `--set train.lr=0.001`. Repeatable.
    #[arg(long = "set", value_name = "SECTION.KEY=VALUE")]
    overrides: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Debug, Default)]
struct ModelFlags {
    /// `v1` or `v2`.
    #[arg(long)]
    model: Option<String>,
    /// Comma-separated output channels per block.
    #[arg(long)]
    channels: Option<String>,
    #[arg(long)]
    clip_len: Option<usize>,
    #[arg(long)]
    height: Option<usize>,
    #[arg(long)]
    width: Option<usize>,
}

#[derive(Args, Debug, Default)]
struct DetectFlags {
    /// `no_window`, `vote`, `mean` or `gaussian`.
    #[arg(long)]
    fusion: Option<String>,
    #[arg(long)]
    sigma: Option<f64>,
    /// `neg_vs_all` or `neg_vs_sum`.
    #[arg(long)]
    decision: Option<String>,
    /// `sliding` or `proposals`.
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    min_len: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a synthetic dataset.
    Synth {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        num_classes: Option<usize>,
    },
    /// Train a classifier on a dataset's train and validation splits.
    Train {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        model: ModelFlags,
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        lr: Option<f64>,
        #[arg(long)]
        batch_size: Option<usize>,
    },
    /// Classify every annotated stroke of a split.
    Classify {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        detect: DetectFlags,
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        split: Option<String>,
    },
    /// Detect strokes in the untrimmed videos of a split.
    Detect {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        detect: DetectFlags,
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        split: Option<String>,
    },
    /// Accuracy and confusion matrix of a predictions file.
    EvalClassify {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        predictions: Option<PathBuf>,
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// mAP and frame IoU of a detections file against a split's ground truth.
    EvalDetect {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        detections: Option<PathBuf>,
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        split: Option<String>,
        #[arg(long)]
        iou: Option<f64>,
    },
    /// Print the per-layer output shapes of a network.
    Shapes {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        model: ModelFlags,
        #[arg(long)]
        classes: Option<usize>,
    },
}

/// Runs one command line (program name first) and returns the exit code:
/// 0 on success, 1 on a domain error, 2 on a usage error.
pub fn run_command<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    run_command_with(argv, &mut std::io::stdout(), &mut std::io::stderr())
}

/// [`run_command`] with explicit output streams.
pub fn run_command_with<I, S>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                2
            } else {
                let _ = write!(out, "{text}");
                0
            };
        }
    };
    init_threads();
    match dispatch(cli.command, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            1
        }
    }
}

fn init_threads() {
    if let Some(n) = std::env::var(THREADS_ENV).ok().and_then(|v| v.parse::<usize>().ok()) {
        // Fails harmlessly when the pool already exists.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

/// File settings, then `--set` overrides, then the dedicated flags.
fn load(common: &Common, flags: Vec<(&str, Option<String>)>) -> Result<ExperimentConfig> {
    let mut cfg = match &common.config {
        Some(path) => parse_config(path)?,
        None => ExperimentConfig::default(),
    };
    let mut items: Vec<String> = common.overrides.clone();
    if let Some(seed) = common.seed {
        items.push(format!("experiment.seed={seed}"));
    }
    items.extend(flags.into_iter().filter_map(|(k, v)| v.map(|v| format!("{k}={v}"))));
    cfg.apply_overrides(items.iter().map(String::as_str))?;
    Ok(cfg)
}

fn show<T: ToString>(v: &Option<T>) -> Option<String> {
    v.as_ref().map(ToString::to_string)
}

fn show_path(v: &Option<PathBuf>) -> Option<String> {
    v.as_ref().map(|p| p.display().to_string())
}

fn model_flags(m: &ModelFlags) -> Vec<(&'static str, Option<String>)> {
    vec![
        ("model.arch", m.model.clone()),
        ("model.channels", m.channels.clone()),
        ("model.clip_len", show(&m.clip_len)),
        ("model.height", show(&m.height)),
        ("model.width", show(&m.width)),
    ]
}

fn detect_flags(d: &DetectFlags) -> Vec<(&'static str, Option<String>)> {
    vec![
        ("detect.fusion", d.fusion.clone()),
        ("detect.sigma", show(&d.sigma)),
        ("detect.decision", d.decision.clone()),
        ("detect.mode", d.mode.clone()),
        ("detect.min_len", show(&d.min_len)),
    ]
}

fn required<'a>(value: &'a Option<PathBuf>, key: &str) -> Result<&'a Path> {
    value.as_deref().ok_or_else(|| Error::Settings {
        key: key.to_string(),
        line: 0,
        message: "required; set it in the config file or with the matching flag".into(),
    })
}

fn existing<'a>(value: &'a Option<PathBuf>, key: &str) -> Result<&'a Path> {
    let path = required(value, key)?;
    if !path.exists() {
        return Err(Error::Settings {
            key: key.to_string(),
            line: 0,
            message: format!("{} does not exist", path.display()),
        });
    }
    Ok(path)
}

fn output_dir(cfg: &ExperimentConfig) -> Result<&Path> {
    let out = required(&cfg.output, "experiment.output")?;
    if let Some(data) = &cfg.dataset {
        if data.exists() && out.exists() && fs::canonicalize(data).ok() == fs::canonicalize(out).ok() {
            return Err(Error::config("the output directory must differ from the dataset directory"));
        }
    }
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    Ok(out)
}

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// `[run]` header plus the full config, replayable with `--config`.
pub fn run_manifest(command: &str, cfg: &ExperimentConfig) -> String {
    format!(
        "[run]\ncommand = {command}\nversion = {}\n\n{}",
        env!("CARGO_PKG_VERSION"),
        cfg.dump()
    )
}

fn write_run_manifest(dir: &Path, command: &str, cfg: &ExperimentConfig) -> Result<()> {
    write_file(&dir.join(RUN_MANIFEST_FILE), run_manifest(command, cfg))
}

fn dispatch(command: Command, out: &mut dyn Write) -> Result<()> {
    match command {
        Command::Synth { common, out: dir, num_classes } => {
            let mut cfg = load(
                &common,
                vec![("experiment.output", show_path(&dir)), ("synth.num_classes", show(&num_classes))],
            )?;
            cfg.synth.seed = cfg.seed;
            let dir = output_dir(&cfg)?;
            let entries = synth_dataset(&cfg.synth, dir)?;
            write_run_manifest(dir, "synth", &cfg)?;
            let _ = writeln!(out, "wrote {} videos to {}", entries.len(), dir.display());
            Ok(())
        }
        Command::Train {
            common,
            model,
            data,
            out: dir,
            epochs,
            lr,
            batch_size,
        } => {
            let mut flags = model_flags(&model);
            flags.extend([
                ("experiment.dataset", show_path(&data)),
                ("experiment.output", show_path(&dir)),
                ("train.epochs", show(&epochs)),
                ("train.lr", show(&lr)),
                ("train.batch_size", show(&batch_size)),
            ]);
            let cfg = load(&common, flags)?;
            run_train(&cfg, out)
        }
        Command::Classify {
            common,
            detect,
            data,
            checkpoint,
            out: dir,
            split,
        } => {
            let mut flags = detect_flags(&detect);
            flags.extend([
                ("experiment.dataset", show_path(&data)),
                ("experiment.checkpoint", show_path(&checkpoint)),
                ("experiment.output", show_path(&dir)),
                ("experiment.split", split),
            ]);
            let cfg = load(&common, flags)?;
            run_classify(&cfg, out)
        }
        Command::Detect {
            common,
            detect,
            data,
            checkpoint,
            out: dir,
            split,
        } => {
            let mut flags = detect_flags(&detect);
            flags.extend([
                ("experiment.dataset", show_path(&data)),
                ("experiment.checkpoint", show_path(&checkpoint)),
                ("experiment.output", show_path(&dir)),
                ("experiment.split", split),
            ]);
            let cfg = load(&common, flags)?;
            run_detect(&cfg, out)
        }
        Command::EvalClassify {
            common,
            predictions,
            data,
            out: dir,
        } => {
            let cfg = load(
                &common,
                vec![
                    ("experiment.input", show_path(&predictions)),
                    ("experiment.dataset", show_path(&data)),
                    ("experiment.output", show_path(&dir)),
                ],
            )?;
            run_eval_classify(&cfg, out)
        }
        Command::EvalDetect {
            common,
            detections,
            data,
            out: dir,
            split,
            iou,
        } => {
            let cfg = load(
                &common,
                vec![
                    ("experiment.input", show_path(&detections)),
                    ("experiment.dataset", show_path(&data)),
                    ("experiment.output", show_path(&dir)),
                    ("experiment.split", split),
                    ("eval.iou_threshold", show(&iou)),
                ],
            )?;
            run_eval_detect(&cfg, out)
        }
        Command::Shapes { common, model, classes } => {
            let cfg = load(&common, model_flags(&model))?;
            let frame = (
                cfg.model.height.unwrap_or(crate::model::DEFAULT_INPUT[2]),
                cfg.model.width.unwrap_or(crate::model::DEFAULT_INPUT[3]),
            );
            let classes = classes.unwrap_or(crate::model::DEFAULT_NUM_CLASSES);
            let spec = cfg.model.network(frame, classes)?;
            let _ = write!(out, "{}", shape_table(&spec)?);
            Ok(())
        }
    }
}

/// One row per layer: index, layer description and output shape.
pub fn shape_table(spec: &crate::model::NetworkSpec) -> Result<String> {
    let mut text = String::new();
    let input = spec.input_shape.map(|d| d.to_string()).join(",");
    let _ = writeln!(text, "{:>3}  {:<36} ({input})", "", "input");
    for row in spec.infer_shapes()? {
        let shape = row.output.iter().map(usize::to_string).collect::<Vec<_>>().join(",");
        let _ = writeln!(text, "{:>3}  {:<36} ({shape})", row.index, row.layer.to_string());
    }
    Ok(text)
}

fn frame_size(cfg: &ExperimentConfig) -> Option<(usize, usize)> {
    cfg.model.height.zip(cfg.model.width)
}

fn run_train(cfg: &ExperimentConfig, out: &mut dyn Write) -> Result<()> {
    let data = existing(&cfg.dataset, "experiment.dataset")?;
    let dir = output_dir(cfg)?;
    let ds = Dataset::load(data, frame_size(cfg))?;
    let first = ds
        .split(Split::Train)
        .next()
        .ok_or_else(|| Error::config("the dataset has no training videos"))?;
    let spec = cfg
        .model
        .network((first.video.height(), first.video.width()), ds.class_names.len())?;
    let clip_len = spec.clip_len();
    let train_set = crate::data::ClipSet::from_videos(
        ds.split(Split::Train),
        &ds.class_names,
        clip_len,
        cfg.negatives_per_video,
        cfg.seed,
    )?;
    let val_set = crate::data::ClipSet::from_videos(
        ds.split(Split::Validation),
        &ds.class_names,
        clip_len,
        cfg.negatives_per_video,
        cfg.seed.wrapping_add(1),
    )?;
    let model = Model::new(spec, cfg.seed)?;
    let mut tc = cfg.train.clone();
    tc.seed = cfg.seed;
    tc.checkpoint = Some(dir.join(CHECKPOINT_FILE));
    let _ = writeln!(out, "{STATS_HEADER}");
    let outcome = train(model, &train_set, &val_set, &tc, |s| {
        let _ = writeln!(
            out,
            "{},{:.6},{:.4},{:.6},{:.4},{}",
            s.epoch, s.train_loss, s.train_acc, s.val_loss, s.val_acc, s.lr
        );
    })?;
    save_checkpoint(&outcome.model, dir.join(CHECKPOINT_FILE))?;
    write_stats_csv(&outcome.stats, dir.join(STATS_FILE))?;
    write_run_manifest(dir, "train", cfg)?;
    if let Some(best) = outcome.best_epoch {
        let _ = writeln!(out, "best epoch {best}; checkpoint {}", dir.join(CHECKPOINT_FILE).display());
    }
    Ok(())
}

fn load_model(cfg: &ExperimentConfig) -> Result<Model<f32>> {
    load_checkpoint(existing(&cfg.checkpoint, "experiment.checkpoint")?)
}

/// Loads the evaluation split at the model's frame size.
fn load_split_for(cfg: &ExperimentConfig, model: &Model<f32>) -> Result<Dataset> {
    let data = existing(&cfg.dataset, "experiment.dataset")?;
    let [_, _, h, w] = model.input_shape();
    let ds = Dataset::load_split(data, Some((h, w)), cfg.split)?;
    if ds.class_names.len() != model.num_classes() {
        return Err(Error::config(format!(
            "the dataset has {} classes but the model predicts {}",
            ds.class_names.len(),
            model.num_classes()
        )));
    }
    Ok(ds)
}

fn run_classify(cfg: &ExperimentConfig, out: &mut dyn Write) -> Result<()> {
    let model = load_model(cfg)?;
    let ds = load_split_for(cfg, &model)?;
    let dir = output_dir(cfg)?;
    let len = model.clip_len();
    let mut csv = format!("{PREDICTIONS_HEADER}\n");
    let (mut correct, mut total) = (0usize, 0usize);
    for lv in &ds.videos {
        let frames = lv.video.frame_count();
        for a in &lv.annotations {
            let truth = ds.class_index(&a.label)?;
            // Short strokes are widened to one centered window.
            let region = if a.frames() < len {
                let s = clip_start(a.begin, a.end, len, 0, frames)?;
                (s, s + len - 1)
            } else {
                (a.begin, a.end)
            };
            let p = classify_trimmed(&model, &lv.video, region, cfg.detect.fusion, cfg.detect.sigma, cfg.detect.batch_size)?;
            correct += usize::from(p.label == truth);
            total += 1;
            let _ = writeln!(
                csv,
                "{},{},{},{},{},{:.6}",
                lv.id, a.begin, a.end, a.label, ds.class_names[p.label], p.confidence
            );
        }
    }
    write_file(&dir.join(PREDICTIONS_FILE), csv)?;
    write_run_manifest(dir, "classify", cfg)?;
    let _ = writeln!(out, "classified {total} strokes, {correct} correct");
    Ok(())
}

fn run_detect(cfg: &ExperimentConfig, out: &mut dyn Write) -> Result<()> {
    let model = load_model(cfg)?;
    let ds = load_split_for(cfg, &model)?;
    let dir = output_dir(cfg)?;
    let mut dc = cfg.detect.clone();
    dc.negative_index = ds
        .negative_index()
        .ok_or_else(|| Error::config("detection needs a `negative` class"))?;
    let ann_dir = dir.join("annotations");
    fs::create_dir_all(&ann_dir).map_err(|e| Error::io(&ann_dir, e))?;
    let mut detections = Vec::new();
    for lv in &ds.videos {
        let segments = detect_video(&model, &lv.video, &dc)?;
        let anns: Vec<_> = segments.iter().map(|s| s.to_annotation(&ds.class_names)).collect();
        write_file(&ann_dir.join(format!("{}.xml", lv.id)), write_annotation_xml(&lv.id, &anns))?;
        let _ = writeln!(out, "{}: {} segments", lv.id, segments.len());
        detections.extend(segments.into_iter().map(|segment| Detection {
            video: lv.id.clone(),
            segment,
        }));
    }
    write_file(&dir.join(DETECTIONS_FILE), detections_csv(&detections, &ds.class_names))?;
    write_run_manifest(dir, "detect", cfg)?;
    Ok(())
}

/// Rows of a predictions file as `(truth, prediction)` class indices.
pub fn parse_predictions_csv(text: &str, class_names: &[String]) -> Result<Vec<(usize, usize)>> {
    let mut lines = text.lines().enumerate();
    if lines.next().map(|(_, h)| h.trim()) != Some(PREDICTIONS_HEADER) {
        return Err(Error::Parse {
            line: 1,
            message: format!("expected header `{PREDICTIONS_HEADER}`"),
        });
    }
    let mut rows = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let parse_err = |message: String| Error::Parse { line: i + 1, message };
        if fields.len() != 6 {
            return Err(parse_err(format!("expected 6 fields, found {}", fields.len())));
        }
        let index = |name: &str| {
            crate::data::class_index(class_names, name.trim()).map_err(|e| parse_err(e.to_string()))
        };
        rows.push((index(fields[3])?, index(fields[4])?));
    }
    Ok(rows)
}

fn run_eval_classify(cfg: &ExperimentConfig, out: &mut dyn Write) -> Result<()> {
    let input = existing(&cfg.input, "experiment.input")?;
    let data = existing(&cfg.dataset, "experiment.dataset")?;
    let dir = output_dir(cfg)?;
    let names = crate::data::read_class_names(data.join(crate::data::CLASSES_FILE))?;
    let text = fs::read_to_string(input).map_err(|e| Error::io(input, e))?;
    let rows = parse_predictions_csv(&text, &names)?;
    let (truth, pred): (Vec<usize>, Vec<usize>) = rows.into_iter().unzip();
    let confusion = confusion_matrix(&pred, &truth, &names)?;
    let report = EvalReport {
        accuracy: confusion.accuracy(),
        confusion: Some(confusion),
        ..Default::default()
    };
    write_report(&report, dir)?;
    write_run_manifest(dir, "eval-classify", cfg)?;
    let _ = write!(out, "{}", report.render());
    Ok(())
}

fn run_eval_detect(cfg: &ExperimentConfig, out: &mut dyn Write) -> Result<()> {
    let input = existing(&cfg.input, "experiment.input")?;
    let data = existing(&cfg.dataset, "experiment.dataset")?;
    let dir = output_dir(cfg)?;
    let (names, videos) = Dataset::load_annotations(data)?;
    let text = fs::read_to_string(input).map_err(|e| Error::io(input, e))?;
    let detections = parse_detections_csv(&text, &names)?;
    let mut truth = Vec::new();
    for (id, _, anns) in videos.into_iter().filter(|(_, s, _)| *s == cfg.split) {
        for a in anns {
            let label = crate::data::class_index(&names, &a.label)?;
            truth.push(Detection {
                video: id.clone(),
                segment: Segment::new(a.begin, a.end, label, 1.0),
            });
        }
    }
    let m = mean_ap(&detections, &truth, cfg.iou_threshold)?;
    let per_class_ap: BTreeMap<String, f64> = m.per_class.iter().map(|(&k, &v)| (names[k].clone(), v)).collect();
    let report = EvalReport {
        per_class_ap,
        map: Some(m.map),
        frame_iou: global_frame_iou(&by_video(&detections), &by_video(&truth)),
        true_positives: Some(m.true_positives),
        false_positives: Some(m.false_positives),
        false_negatives: Some(m.false_negatives),
        ..Default::default()
    };
    write_report(&report, dir)?;
    write_run_manifest(dir, "eval-detect", cfg)?;
    let _ = write!(out, "{}", report.render());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run_command_with(std::iter::once("strokebench").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn shapes_default_v2_ends_at_three_by_two_by_two() {
        let (code, out, _) = run(&["shapes", "--model", "v2"]);
        assert_eq!(code, 0);
        let last_pool = out.lines().filter(|l| l.contains("maxpool")).last().unwrap();
        assert!(last_pool.ends_with("(256,3,2,2)"), "{out}");
    }

    #[test]
    fn unknown_subcommand_is_a_usage_error() {
        let (code, _, err) = run(&["frobnicate"]);
        assert_eq!(code, 2);
        assert!(err.contains("Usage"), "{err}");
        assert_eq!(run(&[]).0, 2);
        assert_eq!(run(&["train", "--bogus"]).0, 2);
    }

    #[test]
    fn help_succeeds() {
        let (code, out, _) = run(&["--help"]);
        assert_eq!(code, 0);
        assert!(out.contains("eval-detect"));
    }

    #[test]
    fn domain_errors_exit_one() {
        let (code, _, err) = run(&["train", "--data", "/nonexistent/strokebench", "--out", "/tmp/x"]);
        assert_eq!(code, 1);
        assert!(err.contains("experiment.dataset"), "{err}");
        assert_eq!(run(&["shapes", "--set", "train.epochs=-1"]).0, 1);
    }

    #[test]
    fn predictions_csv_parses() {
        let names: Vec<String> = ["negative", "a"].map(String::from).to_vec();
        let text = format!("{PREDICTIONS_HEADER}\nv,0,9,a,negative,0.9\n");
        assert_eq!(parse_predictions_csv(&text, &names).unwrap(), vec![(1, 0)]);
        assert!(parse_predictions_csv("bad\n", &names).is_err());
        assert!(parse_predictions_csv(&format!("{PREDICTIONS_HEADER}\nv,0,9,zz,a,1\n"), &names).is_err());
    }
}
