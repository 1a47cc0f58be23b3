//! Mini-batch training with Nesterov SGD, a plateau learning-rate rule
//! and best-validation model selection.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rand::{seq::SliceRandom, Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::data::{augment_clip, ClipSet};
use crate::error::{Error, Result};
use crate::model::{save_checkpoint, Classifier, Model};
use crate::ops::cross_entropy;
use crate::optim::{sgd_nesterov_step, LrPlateau, PlateauConfig, SgdConfig};
use crate::tensor::argmax;

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub lr: f64,
    pub momentum: f64,
    pub weight_decay: f64,
    pub batch_size: usize,
    pub plateau_patience: usize,
    pub plateau_factor: f64,
    pub min_lr: f64,
    /// Random flips and rotations on training clips.
    pub augment: bool,
    /// Random temporal placement of training clips inside their interval.
    pub jitter: bool,
    pub seed: u64,
    /// Written every time the validation loss improves.
    pub checkpoint: Option<PathBuf>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 2000,
            lr: 1e-4,
            momentum: 0.5,
            weight_decay: 0.005,
            batch_size: 8,
            plateau_patience: 50,
            plateau_factor: 0.5,
            min_lr: 1e-6,
            augment: true,
            jitter: true,
            seed: 0,
            checkpoint: None,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lr > 0.0) {
            return Err(Error::config(format!("lr must be positive, got {}", self.lr)));
        }
        if !(self.plateau_factor > 0.0 && self.plateau_factor < 1.0) {
            return Err(Error::config(format!(
                "plateau_factor must lie in (0, 1), got {}",
                self.plateau_factor
            )));
        }
        if self.batch_size == 0 {
            return Err(Error::config("batch_size must be at least 1"));
        }
        if !(self.min_lr >= 0.0) || !(self.momentum >= 0.0) || !(self.weight_decay >= 0.0) {
            return Err(Error::config("min_lr, momentum and weight_decay must be non-negative"));
        }
        Ok(())
    }

    fn plateau(&self) -> PlateauConfig {
        PlateauConfig {
            patience: self.plateau_patience,
            factor: self.plateau_factor,
            min_lr: self.min_lr,
            ..PlateauConfig::default()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpochStats {
    pub epoch: usize,
    /// Mean loss over the epoch's augmented batches.
    pub train_loss: f64,
    pub train_acc: f64,
    pub val_loss: f64,
    pub val_acc: f64,
    /// Learning rate used during the epoch.
    pub lr: f64,
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    /// Parameters from the epoch with the lowest validation loss.
    pub model: Model<f32>,
    pub stats: Vec<EpochStats>,
    pub best_epoch: Option<usize>,
}

impl TrainOutcome {
    pub fn best_val_loss(&self) -> Option<f64> {
        self.best_epoch.map(|e| self.stats[e].val_loss)
    }
}

/// Mean per-sample cross-entropy and accuracy on centered, unaugmented clips.
pub fn evaluate_split<C: Classifier + ?Sized>(model: &C, set: &ClipSet, batch_size: usize) -> Result<(f64, f64)> {
    if set.is_empty() {
        return Err(Error::config("cannot evaluate an empty split"));
    }
    let mut loss = 0.0;
    let mut correct = 0usize;
    let indices: Vec<usize> = (0..set.len()).collect();
    for chunk in indices.chunks(batch_size.max(1)) {
        let clips = chunk.iter().map(|&i| set.clip(i, 0)).collect::<Result<Vec<_>>>()?;
        let (batch, labels) = ClipSet::batch(&clips)?;
        let logits = model.logits(&batch)?.cast::<f64>();
        loss += cross_entropy(&logits, &labels)?;
        let k = logits.shape()[1];
        correct += logits
            .data()
            .chunks(k)
            .zip(&labels)
            .filter(|(row, &l)| argmax(row) == l)
            .count();
    }
    Ok((loss / set.len() as f64, correct as f64 / set.len() as f64))
}

/// Non-finite activations surface as numeric errors; during training they mean divergence.
fn diverged(e: Error, epoch: usize) -> Error {
    match e {
        Error::Numeric(_) => Error::Divergence { epoch, loss: f64::NAN },
        e => e,
    }
}

/// Trains `model` and returns the best-validation parameters with per-epoch stats.
/// `progress` runs after every epoch.
pub fn train(
    mut model: Model<f32>,
    train_set: &ClipSet,
    val_set: &ClipSet,
    cfg: &TrainConfig,
    mut progress: impl FnMut(&EpochStats),
) -> Result<TrainOutcome> {
    cfg.validate()?;
    if train_set.is_empty() || val_set.is_empty() {
        return Err(Error::config("training and validation splits must be non-empty"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let plateau_cfg = cfg.plateau();
    let mut plateau = LrPlateau::default();
    let mut lr = cfg.lr;
    let mut best_model = model.clone();
    let mut best: Option<(usize, f64)> = None;
    let mut stats = Vec::with_capacity(cfg.epochs);
    let mut order: Vec<usize> = (0..train_set.len()).collect();

    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        let mut correct = 0usize;
        for chunk in order.chunks(cfg.batch_size) {
            let mut clips = Vec::with_capacity(chunk.len());
            for &i in chunk {
                let slack = train_set.slack(i);
                let jitter = if cfg.jitter && slack > 0 {
                    rng.random_range(-slack..=slack)
                } else {
                    0
                };
                let clip = train_set.clip(i, jitter)?;
                clips.push(if cfg.augment { augment_clip(&clip, rng.random()) } else { clip });
            }
            let (batch, labels) = ClipSet::batch(&clips)?;
            let (loss, logits) = model.loss_and_grad(&batch, &labels).map_err(|e| diverged(e, epoch))?;
            if !loss.is_finite() {
                return Err(Error::Divergence { epoch, loss });
            }
            loss_sum += loss;
            let k = logits.shape()[1];
            correct += logits
                .data()
                .chunks(k)
                .zip(&labels)
                .filter(|(row, &l)| argmax(row) == l)
                .count();
            sgd_nesterov_step(
                model.params_mut(),
                &SgdConfig {
                    lr,
                    momentum: cfg.momentum,
                    weight_decay: cfg.weight_decay,
                },
            )?;
        }

        let (val_loss, val_acc) = evaluate_split(&model, val_set, cfg.batch_size).map_err(|e| diverged(e, epoch))?;
        if !val_loss.is_finite() {
            return Err(Error::Divergence { epoch, loss: val_loss });
        }
        let n = train_set.len() as f64;
        let row = EpochStats {
            epoch,
            train_loss: loss_sum / n,
            train_acc: correct as f64 / n,
            val_loss,
            val_acc,
            lr,
        };
        if best.is_none_or(|(_, b)| val_loss < b) {
            best = Some((epoch, val_loss));
            best_model = model.clone();
            if let Some(path) = &cfg.checkpoint {
                save_checkpoint(&best_model, path)?;
            }
        }
        progress(&row);
        stats.push(row);
        lr = plateau.step(val_loss, lr, &plateau_cfg);
    }

    Ok(TrainOutcome {
        model: best_model,
        stats,
        best_epoch: best.map(|(e, _)| e),
    })
}

pub const STATS_HEADER: &str = "epoch,train_loss,train_acc,val_loss,val_acc,lr";

pub fn stats_csv(stats: &[EpochStats]) -> String {
    let mut out = format!("{STATS_HEADER}\n");
    for s in stats {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            s.epoch, s.train_loss, s.train_acc, s.val_loss, s.val_acc, s.lr
        );
    }
    out
}

pub fn parse_stats_csv(text: &str) -> Result<Vec<EpochStats>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == STATS_HEADER => {}
        _ => {
            return Err(Error::Parse {
                line: 1,
                message: format!("expected header `{STATS_HEADER}`"),
            })
        }
    }
    let mut out = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let bad = |message: String| Error::Parse { line: i + 1, message };
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 6 {
            return Err(bad(format!("expected 6 columns, found {}", cols.len())));
        }
        let f = |j: usize| cols[j].parse::<f64>().map_err(|_| bad(format!("bad number {:?}", cols[j])));
        out.push(EpochStats {
            epoch: cols[0].parse().map_err(|_| bad(format!("bad epoch {:?}", cols[0])))?,
            train_loss: f(1)?,
            train_acc: f(2)?,
            val_loss: f(3)?,
            val_acc: f(4)?,
            lr: f(5)?,
        });
    }
    Ok(out)
}

pub fn write_stats_csv(stats: &[EpochStats], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, stats_csv(stats)).map_err(|e| Error::io(path, e))
}
