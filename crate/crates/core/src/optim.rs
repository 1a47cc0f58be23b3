//! Nesterov SGD and the plateau learning-rate rule.

use crate::autograd::Param;
use crate::error::{Error, Result};
use crate::tensor::Element;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SgdConfig {
    pub lr: f64,
    pub momentum: f64,
    pub weight_decay: f64,
}

/// One Nesterov update per parameter:
/// `g' = g + wd·θ; v ← μ·v + g'; θ ← θ − lr·(g' + μ·v)`.
pub fn sgd_nesterov_step<T: Element>(params: &mut [Param<T>], cfg: &SgdConfig) -> Result<()> {
    if !(cfg.lr > 0.0) {
        return Err(Error::config(format!("learning rate must be positive, got {}", cfg.lr)));
    }
    let lr = T::from_f64_lossy(cfg.lr);
    let mu = T::from_f64_lossy(cfg.momentum);
    let wd = T::from_f64_lossy(cfg.weight_decay);
    for p in params.iter_mut() {
        let Param { value, grad, velocity } = p;
        for ((theta, &g), v) in value
            .data_mut()
            .iter_mut()
            .zip(grad.data())
            .zip(velocity.data_mut().iter_mut())
        {
            let g = g + wd * *theta;
            *v = mu * *v + g;
            *theta = *theta - lr * (g + mu * *v);
        }
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlateauConfig {
    pub patience: usize,
    pub factor: f64,
    pub min_lr: f64,
    /// Absolute decrease required to count as an improvement.
    pub threshold: f64,
}

impl Default for PlateauConfig {
    fn default() -> Self {
        Self {
            patience: 50,
            factor: 0.5,
            min_lr: 1e-6,
            threshold: 1e-6,
        }
    }
}

/// Tracks validation losses and shrinks the learning rate after
/// `patience` consecutive epochs without improvement.
#[derive(Clone, Debug, PartialEq)]
pub struct LrPlateau {
    pub best: f64,
    pub since_improvement: usize,
}

impl Default for LrPlateau {
    fn default() -> Self {
        Self {
            best: f64::INFINITY,
            since_improvement: 0,
        }
    }
}

impl LrPlateau {
    /// Feeds the latest validation loss and returns the learning rate to use next.
    pub fn step(&mut self, loss: f64, lr: f64, cfg: &PlateauConfig) -> f64 {
        if loss < self.best - cfg.threshold {
            self.best = loss;
            self.since_improvement = 0;
            return lr;
        }
        self.since_improvement += 1;
        if self.since_improvement >= cfg.patience {
            self.since_improvement = 0;
            return (lr * cfg.factor).max(cfg.min_lr).min(lr);
        }
        lr
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::Tensor;

    fn scalar_param(theta: f64, grad: f64) -> Param<f64> {
        let mut p = Param::new(Tensor::scalar(theta));
        p.grad = Tensor::scalar(grad);
        p
    }

    #[test]
    fn hand_recurrence() {
        let mut params = vec![scalar_param(1.0, 1.0)];
        let cfg = SgdConfig { lr: 0.1, momentum: 0.5, weight_decay: 0.0 };
        sgd_nesterov_step(&mut params, &cfg).unwrap();
        assert!((params[0].value.data()[0] - 0.85).abs() < 1e-12);
        sgd_nesterov_step(&mut params, &cfg).unwrap();
        assert!((params[0].value.data()[0] - 0.675).abs() < 1e-12);
    }

    #[test]
    fn zero_momentum_is_vanilla_sgd() {
        let mut params = vec![scalar_param(2.0, 0.3)];
        let cfg = SgdConfig { lr: 0.25, momentum: 0.0, weight_decay: 0.0 };
        sgd_nesterov_step(&mut params, &cfg).unwrap();
        assert_eq!(params[0].value.data()[0], 2.0 - 0.25 * 0.3);
    }

    #[test]
    fn zero_grad_is_fixed_point() {
        let mut params = vec![scalar_param(-1.5, 0.0)];
        let cfg = SgdConfig { lr: 0.1, momentum: 0.9, weight_decay: 0.0 };
        sgd_nesterov_step(&mut params, &cfg).unwrap();
        assert_eq!(params[0].value.data()[0], -1.5);
    }

    #[test]
    fn weight_decay_enters_the_gradient() {
        let mut params = vec![scalar_param(2.0, 0.0)];
        let cfg = SgdConfig { lr: 0.1, momentum: 0.0, weight_decay: 0.5 };
        sgd_nesterov_step(&mut params, &cfg).unwrap();
        assert!((params[0].value.data()[0] - 1.9).abs() < 1e-15);
    }

    #[test]
    fn non_positive_lr_is_rejected() {
        let mut params = vec![scalar_param(1.0, 1.0)];
        let cfg = SgdConfig { lr: 0.0, momentum: 0.5, weight_decay: 0.0 };
        assert!(matches!(sgd_nesterov_step(&mut params, &cfg), Err(Error::Config(_))));
    }

    #[test]
    fn improving_losses_keep_lr() {
        let cfg = PlateauConfig::default();
        let mut p = LrPlateau::default();
        let mut lr = 1e-4;
        for e in 0..500 {
            lr = p.step(10.0 - e as f64 * 0.01, lr, &cfg);
        }
        assert_eq!(lr, 1e-4);
    }

    #[test]
    fn fifty_flat_epochs_halve_once() {
        let cfg = PlateauConfig::default();
        let mut p = LrPlateau::default();
        let mut lr = p.step(1.0, 1e-4, &cfg);
        for _ in 0..49 {
            lr = p.step(1.0, lr, &cfg);
        }
        assert_eq!(lr, 1e-4);
        lr = p.step(1.0, lr, &cfg);
        assert_eq!(lr, 5e-5);
        for _ in 0..49 {
            lr = p.step(1.0, lr, &cfg);
        }
        assert_eq!(lr, 5e-5);
    }

    #[test]
    fn lr_floors_at_min() {
        let cfg = PlateauConfig { patience: 1, ..Default::default() };
        let mut p = LrPlateau::default();
        let mut lr = p.step(1.0, 1e-6, &cfg);
        for _ in 0..5 {
            lr = p.step(1.0, lr, &cfg);
            assert_eq!(lr, 1e-6);
        }
    }

    #[test]
    fn tiny_improvements_do_not_reset_patience() {
        let cfg = PlateauConfig { patience: 3, ..Default::default() };
        let mut p = LrPlateau::default();
        let mut lr = p.step(1.0, 1.0, &cfg);
        for i in 1..=3 {
            lr = p.step(1.0 - i as f64 * 1e-8, lr, &cfg);
        }
        assert_eq!(lr, 0.5);
    }
}
