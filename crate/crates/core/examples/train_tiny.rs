//! Trains a reduced V2 network on synthetic clips and prints per-epoch stats.
//!
//! ```text
//! cargo run --release --example train_tiny -- 60
//! ```

use strokebench::data::{synth_class_names, synth_video, ClipSet, LabeledVideo, Split, SynthConfig};
use strokebench::model::build_v2;
use strokebench::train::{train, TrainConfig};

pub fn videos(cfg: &SynthConfig, split: Split, streams: std::ops::Range<u64>) -> strokebench::Result<Vec<LabeledVideo>> {
    streams
        .map(|s| {
            let (video, annotations) = synth_video(cfg, s)?;
            Ok(LabeledVideo {
                id: format!("{split}_{s:03}"),
                split,
                video,
                annotations,
            })
        })
        .collect()
}

pub fn run_epochs(epochs: usize) -> strokebench::Result<()> {
    let cfg = SynthConfig {
        width: 16,
        height: 16,
        strokes_per_video: 4,
        ..Default::default()
    };
    let names = synth_class_names(cfg.num_classes);
    let train_set = ClipSet::from_videos(&videos(&cfg, Split::Train, 0..4)?, &names, 8, 1, 1)?;
    let val_set = ClipSet::from_videos(&videos(&cfg, Split::Validation, 4..5)?, &names, 8, 1, 2)?;
    println!("{} training clips, {} validation clips", train_set.len(), val_set.len());

    let model = build_v2([3, 8, 16, 16], &[4, 8], names.len(), 0)?;
    let tc = TrainConfig {
        epochs,
        ..Default::default()
    };
    let outcome = train(model, &train_set, &val_set, &tc, |s| {
        println!(
            "epoch {:>3}  train loss {:.4} acc {:.3}  val loss {:.4} acc {:.3}",
            s.epoch, s.train_loss, s.train_acc, s.val_loss, s.val_acc
        );
    })?;
    println!("kept epoch {:?}, val loss {:?}", outcome.best_epoch, outcome.best_val_loss());
    Ok(())
}

pub fn run() -> strokebench::Result<()> {
    run_epochs(3)
}

#[allow(dead_code)]
fn main() -> strokebench::Result<()> {
    let epochs = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(30);
    run_epochs(epochs)
}
