use crate::error::{Error, Result};
use crate::ops::activation::{log_sum_exp, softmax_row};
use crate::tensor::{dims2, Element, Tensor};

fn check_targets(n: usize, b: usize, targets: &[usize]) -> Result<()> {
    if targets.len() != b {
        return Err(Error::dim(format!("{} targets for a batch of {b}", targets.len())));
    }
    if let Some(&t) = targets.iter().find(|&&t| t >= n) {
        return Err(Error::Index(format!("target class {t} out of range for {n} classes")));
    }
    Ok(())
}

/// Softmax cross-entropy summed over the batch: `Σ_b −ln softmax(z_b)[y_b]`.
pub fn cross_entropy<T: Element>(logits: &Tensor<T>, targets: &[usize]) -> Result<T> {
    let [b, n] = dims2(logits.shape(), "cross-entropy logits")?;
    check_targets(n, b, targets)?;
    if !logits.all_finite() {
        return Err(Error::Numeric("cross-entropy received non-finite logits".into()));
    }
    Ok((0..b)
        .map(|r| {
            let row = logits.row(r);
            log_sum_exp(row) - row[targets[r]]
        })
        .sum())
}

/// Gradient of [`cross_entropy`] w.r.t. the logits: `softmax − onehot`, per row.
pub fn cross_entropy_backward<T: Element>(logits: &Tensor<T>, targets: &[usize]) -> Result<Tensor<T>> {
    let [b, n] = dims2(logits.shape(), "cross-entropy logits")?;
    check_targets(n, b, targets)?;
    let mut g = Vec::with_capacity(b * n);
    for (r, &t) in targets.iter().enumerate() {
        let mut p = softmax_row(logits.row(r));
        p[t] = p[t] - T::one();
        g.extend(p);
    }
    Tensor::new(vec![b, n], g)
}
