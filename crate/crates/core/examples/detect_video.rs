//! Trains a small classifier, then finds strokes in an unseen untrimmed video
//! with each fusion method.
//!
//! ```text
//! cargo run --release --example detect_video -- 80
//! ```

use std::collections::BTreeMap;

use strokebench::data::{synth_class_names, synth_video, ClipSet, LabeledVideo, Split, SynthConfig};
use strokebench::detect::{detect_video, DetectionConfig, Fusion, Segment};
use strokebench::eval::{global_frame_iou, match_and_ap};
use strokebench::model::build_v2;
use strokebench::train::{train, TrainConfig};

pub fn run_epochs(epochs: usize) -> strokebench::Result<()> {
    let cfg = SynthConfig {
        width: 16,
        height: 16,
        ..Default::default()
    };
    let names = synth_class_names(cfg.num_classes);
    let labeled = |split, s| -> strokebench::Result<LabeledVideo> {
        let (video, annotations) = synth_video(&cfg, s)?;
        Ok(LabeledVideo {
            id: format!("v{s}"),
            split,
            video,
            annotations,
        })
    };
    let train_videos = (0..6).map(|s| labeled(Split::Train, s)).collect::<strokebench::Result<Vec<_>>>()?;
    let val_videos = [labeled(Split::Validation, 6)?];
    let train_set = ClipSet::from_videos(&train_videos, &names, 8, 2, 1)?;
    let val_set = ClipSet::from_videos(&val_videos, &names, 8, 2, 2)?;
    let model = build_v2([3, 8, 16, 16], &[4, 8], names.len(), 0)?;
    let tc = TrainConfig {
        epochs,
        ..Default::default()
    };
    let model = train(model, &train_set, &val_set, &tc, |_| {})?.model;

    let test = labeled(Split::Test, 7)?;
    let truth: Vec<Segment> = test
        .annotations
        .iter()
        .map(|a| Segment::new(a.begin, a.end, names.iter().position(|n| *n == a.label).unwrap(), 1.0))
        .collect();
    println!("truth: {}", describe(&truth, &names));
    for &fusion in Fusion::ALL {
        let dc = DetectionConfig {
            fusion,
            min_len: 20,
            ..Default::default()
        };
        let found = detect_video(&model, &test.video, &dc)?;
        let iou = global_frame_iou(
            &BTreeMap::from([(test.id.clone(), found.clone())]),
            &BTreeMap::from([(test.id.clone(), truth.clone())]),
        );
        println!("{fusion:>9}: {}", describe(&found, &names));
        println!(
            "           frame IoU {:.3}, class-agnostic AP {:.3}",
            iou.unwrap_or(0.0),
            match_and_ap(&found, &truth, 0.5).ap
        );
    }
    Ok(())
}

fn describe(segments: &[Segment], names: &[String]) -> String {
    segments
        .iter()
        .map(|s| format!("{}[{}..{}]", names[s.label], s.begin, s.end))
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn run() -> strokebench::Result<()> {
    run_epochs(2)
}

#[allow(dead_code)]
fn main() -> strokebench::Result<()> {
    let epochs = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(80);
    run_epochs(epochs)
}
