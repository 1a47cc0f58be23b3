//! Saves a model, loads it back and checks that predictions are unchanged.

use strokebench::model::{build_v1, load_checkpoint, load_checkpoint_expecting, save_checkpoint, Classifier};
use strokebench::tensor::Tensor;

pub fn run() -> strokebench::Result<()> {
    let model = build_v1([3, 8, 16, 24], &[4, 4, 6], 4, 11)?;
    let tmp = tempfile::tempdir().map_err(|e| strokebench::Error::io("tempdir", e))?;
    let path = tmp.path().join("v1.ckpt");
    save_checkpoint(&model, &path)?;
    let bytes = std::fs::metadata(&path).map_err(|e| strokebench::Error::io(&path, e))?.len();

    let restored = load_checkpoint(&path)?;
    let clip = Tensor::from_fn(vec![1, 3, 8, 16, 24], |i| ((i * 37) % 101) as f32 / 100.0);
    println!("{} bytes, digest {:016x} -> {:016x}", bytes, model.param_digest(), restored.param_digest());
    println!("before {:?}", model.probabilities(&clip)?[0]);
    println!("after  {:?}", restored.probabilities(&clip)?[0]);

    let mut other = model.spec().clone();
    other.num_classes = 5;
    if let Err(e) = load_checkpoint_expecting(&path, &other) {
        println!("spec mismatch: {e}");
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> strokebench::Result<()> {
    run()
}
