//! Writes a synthetic dataset and reads it back.
//!
//! ```text
//! cargo run --example synth_dataset -- /tmp/strokes
//! ```

use strokebench::data::{synth_dataset, Dataset, SynthConfig};

pub fn run_in(dir: &std::path::Path) -> strokebench::Result<()> {
    let cfg = SynthConfig {
        videos: [2, 1, 1],
        width: 24,
        height: 24,
        ..Default::default()
    };
    let entries = synth_dataset(&cfg, dir)?;
    println!("{} videos under {}", entries.len(), dir.display());

    let ds = Dataset::load(dir, None)?;
    println!("classes: {}", ds.class_names.join(", "));
    for v in &ds.videos {
        let strokes: Vec<String> = v
            .annotations
            .iter()
            .map(|a| format!("{}[{}..{}]", a.label, a.begin, a.end))
            .collect();
        println!("{:<16} {:>4} frames  {}", format!("{} ({})", v.id, v.split), v.video.frame_count(), strokes.join(" "));
    }
    Ok(())
}

pub fn run() -> strokebench::Result<()> {
    let tmp = tempfile::tempdir().map_err(|e| strokebench::Error::io("tempdir", e))?;
    run_in(tmp.path())
}

#[allow(dead_code)]
fn main() -> strokebench::Result<()> {
    match std::env::args().nth(1) {
        Some(dir) => run_in(dir.as_ref()),
        None => run(),
    }
}
