//! Runs synth, train, detect and eval-detect through the command-line entry point.
//!
//! ```text
//! cargo run --release --example cli_pipeline -- /tmp/run
//! ```

use std::path::Path;

use strokebench::cli::run_command;

pub fn run_in(root: &Path) -> strokebench::Result<()> {
    let [data, run, detect, eval, ckpt, dets] =
        ["data", "run", "detect", "eval", "run/model.ckpt", "detect/detections.csv"].map(|s| root.join(s).display().to_string());
    let steps = [
        vec!["synth", "--seed", "1", "--out", &data, "--set", "synth.width=16", "--set", "synth.height=16",
             "--set", "synth.train_videos=3", "--set", "synth.validation_videos=1", "--set", "synth.test_videos=1"],
        vec!["train", "--data", &data, "--out", &run, "--channels", "4,8", "--clip-len", "8", "--epochs", "3"],
        vec!["detect", "--data", &data, "--checkpoint", &ckpt, "--out", &detect, "--min-len", "20"],
        vec!["eval-detect", "--data", &data, "--detections", &dets, "--out", &eval],
    ];
    for step in steps {
        println!("$ strokebench {}", step.join(" "));
        let code = run_command(std::iter::once("strokebench").chain(step.iter().copied()));
        if code != 0 {
            return Err(strokebench::Error::State(format!("{} exited with {code}", step[0])));
        }
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
