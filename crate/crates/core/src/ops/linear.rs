use crate::error::{Error, Result};
use crate::tensor::{dims2, Element, Tensor};

fn check<T: Element>(input: &Tensor<T>, weight: &Tensor<T>, bias: &Tensor<T>) -> Result<[usize; 3]> {
    let [b, f] = dims2(input.shape(), "linear input")?;
    let [o, wf] = dims2(weight.shape(), "linear weight")?;
    if wf != f {
        return Err(Error::dim(format!("linear: input has {f} features, weight expects {wf}")));
    }
    if bias.shape() != [o] {
        return Err(Error::dim(format!("linear: bias {:?} does not match {o} outputs", bias.shape())));
    }
    Ok([b, f, o])
}

/// `y = x Wᵀ + b` for `x: [B, F]`, `W: [O, F]`, `b: [O]`.
pub fn linear<T: Element>(input: &Tensor<T>, weight: &Tensor<T>, bias: &Tensor<T>) -> Result<Tensor<T>> {
    let [b, f, o] = check(input, weight, bias)?;
    let x = input.data();
    let w = weight.data();
    let mut out = Vec::with_capacity(b * o);
    for bi in 0..b {
        let row = &x[bi * f..(bi + 1) * f];
        for oi in 0..o {
            let wr = &w[oi * f..(oi + 1) * f];
            let s = row.iter().zip(wr).fold(T::zero(), |acc, (&a, &c)| acc + a * c);
            out.push(s + bias.data()[oi]);
        }
    }
    Tensor::new(vec![b, o], out)
}

/// Returns `(grad_input, grad_weight, grad_bias)`.
pub fn linear_backward<T: Element>(
    input: &Tensor<T>,
    weight: &Tensor<T>,
    bias: &Tensor<T>,
    grad_out: &Tensor<T>,
) -> Result<(Tensor<T>, Tensor<T>, Tensor<T>)> {
    let [b, f, o] = check(input, weight, bias)?;
    grad_out.expect_shape(&[b, o])?;
    let x = input.data();
    let w = weight.data();
    let g = grad_out.data();
    let mut gx = vec![T::zero(); b * f];
    let mut gw = vec![T::zero(); o * f];
    let mut gb = vec![T::zero(); o];
    for bi in 0..b {
        let xr = &x[bi * f..(bi + 1) * f];
        let gxr = &mut gx[bi * f..(bi + 1) * f];
        for oi in 0..o {
            let go = g[bi * o + oi];
            gb[oi] = gb[oi] + go;
            let wr = &w[oi * f..(oi + 1) * f];
            let gwr = &mut gw[oi * f..(oi + 1) * f];
            for k in 0..f {
                gxr[k] = gxr[k] + go * wr[k];
                gwr[k] = gwr[k] + go * xr[k];
            }
        }
    }
    Ok((
        Tensor::new(vec![b, f], gx)?,
        Tensor::new(vec![o, f], gw)?,
        Tensor::new(vec![o], gb)?,
    ))
}
