//! Residual multiplicative attention.
//!
//! A 1×1×1 convolution collapses channels into one logit per cell; its
//! sigmoid `M` gates the input as `x · (1 + M)`, broadcast over channels.

use crate::error::{Error, Result};
use crate::ops::activation::sigmoid;
use crate::tensor::{dims5, Element, Tensor};

pub struct AttentionOutput<T> {
    pub output: Tensor<T>,
    /// Sigmoid mask, one value per `(batch, t, h, w)` cell.
    pub mask: Vec<T>,
}

fn check<T: Element>(input: &Tensor<T>, mask_weight: &Tensor<T>, mask_bias: &Tensor<T>) -> Result<[usize; 5]> {
    let dims = dims5(input.shape(), "attention input")?;
    let c = dims[1];
    if mask_weight.shape() != [1, c, 1, 1, 1] {
        return Err(Error::dim(format!(
            "attention mask weight {:?} does not match {c} channels",
            mask_weight.shape()
        )));
    }
    if mask_bias.shape() != [1] {
        return Err(Error::dim(format!("attention mask bias {:?} must be [1]", mask_bias.shape())));
    }
    Ok(dims)
}

pub fn attention<T: Element>(
    input: &Tensor<T>,
    mask_weight: &Tensor<T>,
    mask_bias: &Tensor<T>,
) -> Result<AttentionOutput<T>> {
    let [b, c, t, h, w] = check(input, mask_weight, mask_bias)?;
    let plane = t * h * w;
    let x = input.data();
    let wt = mask_weight.data();
    let bias = mask_bias.data()[0];

    let mut mask = vec![bias; b * plane];
    for bi in 0..b {
        let m = &mut mask[bi * plane..(bi + 1) * plane];
        for (ci, &wc) in wt.iter().enumerate() {
            let xc = &x[(bi * c + ci) * plane..][..plane];
            for (z, &v) in m.iter_mut().zip(xc) {
                *z = *z + wc * v;
            }
        }
        for z in m.iter_mut() {
            *z = sigmoid(*z);
        }
    }

    let mut out = vec![T::zero(); x.len()];
    for bi in 0..b {
        let m = &mask[bi * plane..(bi + 1) * plane];
        for ci in 0..c {
            let off = (bi * c + ci) * plane;
            for ((o, &v), &g) in out[off..off + plane].iter_mut().zip(&x[off..off + plane]).zip(m) {
                *o = v * (T::one() + g);
            }
        }
    }
    Ok(AttentionOutput {
        output: Tensor::new(input.shape().to_vec(), out)?,
        mask,
    })
}

/// Returns `(grad_input, grad_mask_weight, grad_mask_bias)`.
pub fn attention_backward<T: Element>(
    input: &Tensor<T>,
    mask_weight: &Tensor<T>,
    mask_bias: &Tensor<T>,
    mask: &[T],
    grad_out: &Tensor<T>,
) -> Result<(Tensor<T>, Tensor<T>, Tensor<T>)> {
    let [b, c, t, h, w] = check(input, mask_weight, mask_bias)?;
    grad_out.expect_shape(input.shape())?;
    let plane = t * h * w;
    let x = input.data();
    let go = grad_out.data();
    let wt = mask_weight.data();

    // s = dL/dz for the pre-sigmoid mask logit.
    let mut s = vec![T::zero(); b * plane];
    for bi in 0..b {
        let sb = &mut s[bi * plane..(bi + 1) * plane];
        for ci in 0..c {
            let off = (bi * c + ci) * plane;
            for ((acc, &g), &v) in sb.iter_mut().zip(&go[off..off + plane]).zip(&x[off..off + plane]) {
                *acc = *acc + g * v;
            }
        }
        for (acc, &m) in sb.iter_mut().zip(&mask[bi * plane..(bi + 1) * plane]) {
            *acc = *acc * m * (T::one() - m);
        }
    }

    let mut gin = vec![T::zero(); x.len()];
    let mut gw = vec![T::zero(); c];
    for bi in 0..b {
        let sb = &s[bi * plane..(bi + 1) * plane];
        let mb = &mask[bi * plane..(bi + 1) * plane];
        for ci in 0..c {
            let off = (bi * c + ci) * plane;
            let wc = wt[ci];
            let mut acc = T::zero();
            for p in 0..plane {
                gin[off + p] = go[off + p] * (T::one() + mb[p]) + sb[p] * wc;
                acc = acc + sb[p] * x[off + p];
            }
            gw[ci] = gw[ci] + acc;
        }
    }
    let gb: T = s.iter().copied().sum();
    Ok((
        Tensor::new(input.shape().to_vec(), gin)?,
        Tensor::new(vec![1, c, 1, 1, 1], gw)?,
        Tensor::new(vec![1], vec![gb])?,
    ))
}
