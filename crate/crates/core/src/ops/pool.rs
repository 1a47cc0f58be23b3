//! Non-overlapping 3D max pooling.

use crate::error::{Error, Result};
use crate::tensor::{dims5, Element, Tensor};

/// Pooled output plus, for every output cell, the flat input index that won.
#[derive(Clone, Debug)]
pub struct Pooled<T> {
    pub output: Tensor<T>,
    pub argmax: Vec<usize>,
}

pub fn pooled_shape(input: [usize; 3], window: [usize; 3]) -> Result<[usize; 3]> {
    let mut out = [0; 3];
    for axis in 0..3 {
        if window[axis] == 0 {
            return Err(Error::dim(format!("pool window {window:?} has a zero extent")));
        }
        if window[axis] > input[axis] {
            return Err(Error::dim(format!(
                "pool window {window:?} exceeds input extent {input:?} along axis {axis}"
            )));
        }
        out[axis] = input[axis] / window[axis];
    }
    Ok(out)
}

/// Ties go to the first cell in row-major (t, h, w) order within the window.
pub fn maxpool3d<T: Element>(input: &Tensor<T>, window: [usize; 3]) -> Result<Pooled<T>> {
    let [b, c, t, h, w] = dims5(input.shape(), "maxpool3d input")?;
    let [ot, oh, ow] = pooled_shape([t, h, w], window)?;
    let [pt, ph, pw] = window;
    let x = input.data();
    let n_out = b * c * ot * oh * ow;
    let mut out = Vec::with_capacity(n_out);
    let mut argmax = Vec::with_capacity(n_out);
    for bc in 0..b * c {
        let base = bc * t * h * w;
        for zt in 0..ot {
            for zh in 0..oh {
                for zw in 0..ow {
                    let mut best_idx = base + ((zt * pt) * h + zh * ph) * w + zw * pw;
                    let mut best = x[best_idx];
                    for dt in 0..pt {
                        for dh in 0..ph {
                            let row = base + ((zt * pt + dt) * h + zh * ph + dh) * w + zw * pw;
                            for dw in 0..pw {
                                let v = x[row + dw];
                                if v > best {
                                    best = v;
                                    best_idx = row + dw;
                                }
                            }
                        }
                    }
                    out.push(best);
                    argmax.push(best_idx);
                }
            }
        }
    }
    Ok(Pooled {
        output: Tensor::new(vec![b, c, ot, oh, ow], out)?,
        argmax,
    })
}

/// Routes each output gradient to its recorded argmax cell.
pub fn maxpool3d_backward<T: Element>(
    input_shape: &[usize],
    argmax: &[usize],
    grad_out: &Tensor<T>,
) -> Result<Tensor<T>> {
    if argmax.len() != grad_out.len() {
        return Err(Error::dim("maxpool3d backward: argmax and gradient lengths differ"));
    }
    let mut gin = Tensor::zeros(input_shape.to_vec());
    let g = gin.data_mut();
    for (&idx, &v) in argmax.iter().zip(grad_out.data()) {
        g[idx] = g[idx] + v;
    }
    Ok(gin)
}
