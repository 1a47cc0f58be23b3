//! How the four fusion methods turn a window score timeline into frame decisions.

use strokebench::detect::{fuse_frame_scores, frame_decision, segments_from_frames, Decision, Fusion, ScoreTimeline};

pub fn run() -> strokebench::Result<()> {
    // Two classes; windows of 8 frames; a stroke is visible to windows 10..=24.
    let n = 40;
    let scores: Vec<Vec<f64>> = (0..n)
        .map(|w| {
            let p = if (10..=24).contains(&w) { 0.85 } else if w % 7 == 0 { 0.55 } else { 0.1 };
            vec![1.0 - p, p]
        })
        .collect();
    let timeline = ScoreTimeline {
        window_starts: (0..n).collect(),
        scores,
        window_len: 8,
        frame_count: n + 7,
    };
    for &fusion in Fusion::ALL {
        let frames = fuse_frame_scores(&timeline, fusion, 4.0)?;
        let (mask, score) = frame_decision(&frames, Decision::NegVsAll, 0)?;
        let row: String = mask.iter().map(|&m| if m { '#' } else { '.' }).collect();
        let segs = segments_from_frames(&mask, &score, &frames, 0, 5);
        let spans: Vec<String> = segs.iter().map(|s| format!("[{}..{}] {:.2}", s.begin, s.end, s.confidence)).collect();
        println!("{:>9} {row} {}", fusion.as_str(), spans.join(" "));
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> strokebench::Result<()> {
    run()
}
