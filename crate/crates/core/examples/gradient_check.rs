//! Compares tape gradients of a whole small network with central differences.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use strokebench::gradcheck::gradient_check;
use strokebench::model::{Model, NetworkSpec};
use strokebench::tensor::Tensor;

pub fn run() -> strokebench::Result<()> {
    let spec = NetworkSpec::v2([2, 8, 18, 32], &[2, 3], 3)?.with_hidden_fc(6)?;
    let model: Model<f64> = Model::new(spec, 1)?;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    // Small inputs keep the softmax unsaturated; saturated losses drown the differences in rounding.
    let clip = Tensor::from_fn(vec![1, 2, 8, 18, 32], |_| rng.random_range(-0.2..0.2));

    let mut params = model.params().to_vec();
    let report = gradient_check(&mut params, 1e-6, |tape, vars| {
        let x = tape.input(clip.clone());
        let logits = model.forward_with_params(tape, vars, x)?;
        tape.cross_entropy(logits, &[2])
    })?;
    println!(
        "checked {} values, max relative error {:.3e} at {:?}",
        report.checked, report.max_rel_error, report.worst
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> strokebench::Result<()> {
    run()
}
