//! Scores hand-written detections against ground truth.

use std::collections::BTreeMap;

use strokebench::detect::{Detection, Segment};
use strokebench::eval::{by_video, global_frame_iou, mean_ap, EvalReport, DEFAULT_IOU_THRESHOLD};

fn det(video: &str, begin: usize, end: usize, label: usize, score: f64) -> Detection {
    Detection {
        video: video.into(),
        segment: Segment::new(begin, end, label, score),
    }
}

pub fn run() -> strokebench::Result<()> {
    let names = ["negative", "serve", "push"].map(String::from);
    let truth = vec![
        det("a", 100, 199, 1, 1.0),
        det("a", 400, 470, 2, 1.0),
        det("b", 50, 140, 1, 1.0),
    ];
    let found = vec![
        det("a", 105, 190, 1, 0.92),
        det("a", 300, 350, 1, 0.55),
        det("a", 380, 460, 2, 0.71),
        det("b", 60, 150, 1, 0.40),
    ];
    let m = mean_ap(&found, &truth, DEFAULT_IOU_THRESHOLD)?;
    let report = EvalReport {
        per_class_ap: m.per_class.iter().map(|(&c, &ap)| (names[c].clone(), ap)).collect::<BTreeMap<_, _>>(),
        map: Some(m.map),
        frame_iou: global_frame_iou(&by_video(&found), &by_video(&truth)),
        true_positives: Some(m.true_positives),
        false_positives: Some(m.false_positives),
        false_negatives: Some(m.false_negatives),
        ..Default::default()
    };
    print!("{}", report.render());
    print!("{}", report.metrics_csv());
    Ok(())
}

#[allow(dead_code)]
fn main() -> strokebench::Result<()> {
    run()
}
