//! Central finite-difference verification of tape gradients (float64).

use crate::autograd::{Param, Tape, Var};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct GradCheckReport {
    pub max_rel_error: f64,
    /// `(parameter index, element index)` of the worst element.
    pub worst: Option<(usize, usize)>,
    pub checked: usize,
}

impl GradCheckReport {
    pub fn passes(&self, tolerance: f64) -> bool {
        self.max_rel_error < tolerance
    }
}

fn eval<F>(params: &[Param<f64>], f: &mut F) -> Result<f64>
where
    F: FnMut(&mut Tape<f64>, &[Var]) -> Result<Var>,
{
    let mut tape = Tape::new();
    let vars: Vec<Var> = params
        .iter()
        .enumerate()
        .map(|(i, p)| tape.param(i, p.value.clone()))
        .collect();
    let loss = f(&mut tape, &vars)?;
    let v = tape.value(loss);
    if v.len() != 1 {
        return Err(Error::State("gradient check needs a scalar loss".into()));
    }
    Ok(v.data()[0])
}

/// Compares analytic gradients of `loss_fn` against central differences
/// with step `eps`. Relative error per element is
/// `|a − n| / max(|a|, |n|, 1e-12)`. Parameter values are restored on return
/// and `grad` holds the analytic gradient.
pub fn gradient_check<F>(params: &mut [Param<f64>], eps: f64, mut loss_fn: F) -> Result<GradCheckReport>
where
    F: FnMut(&mut Tape<f64>, &[Var]) -> Result<Var>,
{
    let mut tape = Tape::new();
    let vars: Vec<Var> = params
        .iter()
        .enumerate()
        .map(|(i, p)| tape.param(i, p.value.clone()))
        .collect();
    let loss = loss_fn(&mut tape, &vars)?;
    params.iter_mut().for_each(Param::zero_grad);
    tape.backward(loss, params)?;

    let mut report = GradCheckReport {
        max_rel_error: 0.0,
        worst: None,
        checked: 0,
    };
    for pi in 0..params.len() {
        for ei in 0..params[pi].value.len() {
            let orig = params[pi].value.data()[ei];
            params[pi].value.data_mut()[ei] = orig + eps;
            let plus = eval(params, &mut loss_fn);
            params[pi].value.data_mut()[ei] = orig - eps;
            let minus = eval(params, &mut loss_fn);
            params[pi].value.data_mut()[ei] = orig;
            let numeric = (plus? - minus?) / (2.0 * eps);
            let analytic = params[pi].grad.data()[ei];
            let denom = analytic.abs().max(numeric.abs()).max(1e-12);
            let rel = (analytic - numeric).abs() / denom;
            report.checked += 1;
            if report.worst.is_none() || rel > report.max_rel_error {
                report.max_rel_error = rel;
                report.worst = Some((pi, ei));
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::Tensor;

    fn lcg(seed: u64) -> impl FnMut() -> f64 {
        let mut s = seed;
        move || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        }
    }

    #[test]
    fn linear_layer() {
        let mut r = lcg(3);
        let x = Tensor::from_fn(vec![4, 3], |_| r());
        let mut params = vec![
            Param::new(Tensor::from_fn(vec![2, 3], |_| r())),
            Param::new(Tensor::from_fn(vec![2], |_| r())),
        ];
        let rep = gradient_check(&mut params, 1e-4, |tape, v| {
            let xi = tape.input(x.clone());
            let y = tape.linear(xi, v[0], v[1])?;
            tape.cross_entropy(y, &[0, 1, 1, 0])
        })
        .unwrap();
        assert!(rep.passes(1e-6), "{rep:?}");
        assert_eq!(rep.checked, 8);
    }

    #[test]
    fn conv3d_layer() {
        let mut r = lcg(5);
        let x = Tensor::from_fn(vec![1, 1, 4, 4, 4], |_| r());
        let probe = Tensor::from_fn(vec![1, 2, 4, 4, 4], |_| r());
        let mut params = vec![
            Param::new(Tensor::from_fn(vec![2, 1, 3, 3, 3], |_| r())),
            Param::new(Tensor::from_fn(vec![2], |_| r())),
        ];
        let rep = gradient_check(&mut params, 1e-4, |tape, v| {
            let xi = tape.input(x.clone());
            let y = tape.conv3d(xi, v[0], v[1])?;
            let p = tape.input(probe.clone());
            let m = tape.mul(y, p)?;
            tape.sum(m)
        })
        .unwrap();
        assert!(rep.passes(1e-5), "{rep:?}");
    }

    #[test]
    fn conv3d_input_gradient() {
        let mut r = lcg(11);
        let w = Tensor::from_fn(vec![2, 2, 3, 1, 3], |_| r());
        let b = Tensor::from_fn(vec![2], |_| r());
        let probe = Tensor::from_fn(vec![1, 2, 3, 3, 4], |_| r());
        let mut params = vec![Param::new(Tensor::from_fn(vec![1, 2, 3, 3, 4], |_| r()))];
        let rep = gradient_check(&mut params, 1e-4, |tape, v| {
            let wi = tape.input(w.clone());
            let bi = tape.input(b.clone());
            let y = tape.conv3d(v[0], wi, bi)?;
            let p = tape.input(probe.clone());
            let m = tape.mul(y, p)?;
            tape.sum(m)
        })
        .unwrap();
        assert!(rep.passes(1e-5), "{rep:?}");
    }

    #[test]
    fn attention_block() {
        let mut r = lcg(9);
        let probe = Tensor::from_fn(vec![1, 2, 2, 2, 2], |_| r());
        let mut params = vec![
            Param::new(Tensor::from_fn(vec![1, 2, 2, 2, 2], |_| r())),
            Param::new(Tensor::from_fn(vec![1, 2, 1, 1, 1], |_| r())),
            Param::new(Tensor::from_fn(vec![1], |_| r())),
        ];
        let rep = gradient_check(&mut params, 1e-4, |tape, v| {
            let y = tape.attention(v[0], v[1], v[2])?;
            let p = tape.input(probe.clone());
            let m = tape.mul(y, p)?;
            tape.sum(m)
        })
        .unwrap();
        assert!(rep.passes(1e-5), "{rep:?}");
    }

    #[test]
    fn maxpool_and_relu() {
        let mut r = lcg(13);
        let probe = Tensor::from_fn(vec![1, 1, 2, 2, 1], |_| r());
        // Values spaced well apart so ±eps never flips an argmax or a sign.
        let mut params = vec![Param::new(Tensor::from_fn(vec![1, 1, 4, 4, 3], |i| {
            let v = ((i * 29) % 48) as f64 * 0.1 - 2.35;
            v + 0.001 * r()
        }))];
        let rep = gradient_check(&mut params, 1e-4, |tape, v| {
            let a = tape.relu(v[0])?;
            let y = tape.maxpool3d(a, [2, 2, 3])?;
            let p = tape.input(probe.clone());
            let m = tape.mul(y, p)?;
            tape.sum(m)
        })
        .unwrap();
        assert!(rep.passes(1e-6), "{rep:?}");
    }

    #[test]
    fn params_are_restored() {
        let original = Tensor::new(vec![2], vec![0.3, -0.7]).unwrap();
        let mut params = vec![Param::new(original.clone())];
        gradient_check(&mut params, 1e-4, |tape, v| {
            let sq = tape.mul(v[0], v[0])?;
            tape.sum(sq)
        })
        .unwrap();
        assert_eq!(params[0].value, original);
    }
}
