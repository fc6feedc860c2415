use std::f64::consts::PI;

use crate::arch::ParamMap;
use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Adam and schedule hyperparameters.
#[derive(Clone, Debug, PartialEq)]
pub struct OptimizerConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    /// L2 penalty added to the gradient.
    pub weight_decay: f64,
    pub epochs: usize,
    pub batch_size: usize,
    /// Fraction of epochs with a linear ramp from 0 to the base rate.
    pub warmup_fraction: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            weight_decay: 0.0,
            epochs: 300,
            batch_size: 2,
            warmup_fraction: 0.0,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0 < self.beta1 && self.beta1 < self.beta2 && self.beta2 < 1.0) {
            return Err(Error::config(format!(
                "betas must satisfy 0 < beta1 < beta2 < 1, got ({}, {})",
                self.beta1, self.beta2
            )));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::config("learning rate must be positive"));
        }
        if self.batch_size == 0 || self.epochs == 0 {
            return Err(Error::config("epochs and batch size must be positive"));
        }
        if !(0.0..1.0).contains(&self.warmup_fraction) {
            return Err(Error::config("warmup fraction must be in [0, 1)"));
        }
        if self.weight_decay < 0.0 || self.eps <= 0.0 {
            return Err(Error::config("weight decay must be >= 0 and eps > 0"));
        }
        Ok(())
    }

    /// Rate for `epoch`: linear warmup, then cosine decay over all epochs.
    pub fn lr_at(&self, epoch: usize) -> f64 {
        let warm = (self.warmup_fraction * self.epochs as f64).round() as usize;
        if epoch < warm {
            self.learning_rate * (epoch + 1) as f64 / warm as f64
        } else {
            cosine_lr(epoch, self.epochs, self.learning_rate)
        }
    }
}

pub fn cosine_lr(epoch: usize, total_epochs: usize, base_lr: f64) -> f64 {
    base_lr * 0.5 * (1.0 + (PI * epoch as f64 / total_epochs as f64).cos())
}

/// First and second moments of every parameter.
#[derive(Clone, Debug, PartialEq)]
pub struct AdamState {
    pub m: ParamMap,
    pub v: ParamMap,
    pub step: u64,
}

impl AdamState {
    pub fn new(params: &ParamMap) -> Self {
        let zeros = |p: &ParamMap| {
            let mut out = ParamMap::new();
            for (name, t) in p.iter() {
                out.insert(name, Tensor::zeros(t.shape().to_vec()));
            }
            out
        };
        AdamState { m: zeros(params), v: zeros(params), step: 0 }
    }
}

/// One bias-corrected Adam update of every tensor in `params`.
pub fn adam_step(
    params: &mut ParamMap,
    grads: &ParamMap,
    state: &mut AdamState,
    lr: f64,
    cfg: &OptimizerConfig,
) -> Result<()> {
    state.step += 1;
    let t = state.step as i32;
    let bc1 = 1.0 - cfg.beta1.powi(t);
    let bc2 = 1.0 - cfg.beta2.powi(t);
    let (b1, b2) = (cfg.beta1 as f32, cfg.beta2 as f32);
    let wd = cfg.weight_decay as f32;
    let step_size = (lr / bc1) as f32;
    let bc2_sqrt = bc2.sqrt() as f32;
    let eps = cfg.eps as f32;
    for (name, p) in params.iter_mut() {
        let g = grads
            .get(name)
            .map_err(|_| Error::usage(format!("no gradient for parameter {name:?}")))?;
        if g.len() != p.len() {
            return Err(Error::dim("adam", format!("gradient for {name:?} has wrong length")));
        }
        let m = state.m.get_mut(name)?;
        let m = m.data_mut();
        let v = state.v.get_mut(name)?.data_mut();
        for (i, (x, &gi)) in p.data_mut().iter_mut().zip(g.data()).enumerate() {
            let gi = gi + wd * *x;
            m[i] = b1 * m[i] + (1.0 - b1) * gi;
            v[i] = b2 * v[i] + (1.0 - b2) * gi * gi;
            *x -= step_size * m[i] / (v[i].sqrt() / bc2_sqrt + eps);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar_map(v: f32) -> ParamMap {
        let mut p = ParamMap::new();
        p.insert("w", Tensor::new(vec![1], vec![v]).unwrap());
        p
    }

    #[test]
    fn cosine_examples() {
        assert_eq!(cosine_lr(0, 300, 1e-3), 1e-3);
        assert!((cosine_lr(150, 300, 1e-3) - 5e-4).abs() < 1e-15);
        let expect = 1e-3 * 0.5 * (1.0 + (299.0 * PI / 300.0).cos());
        assert_eq!(cosine_lr(299, 300, 1e-3), expect);
    }

    #[test]
    fn warmup_ramps() {
        let cfg = OptimizerConfig { epochs: 10, warmup_fraction: 0.2, ..Default::default() };
        assert!((cfg.lr_at(0) - 5e-4).abs() < 1e-15);
        assert!((cfg.lr_at(1) - 1e-3).abs() < 1e-15);
        assert_eq!(cfg.lr_at(2), cosine_lr(2, 10, 1e-3));
    }

    #[test]
    fn zero_grad_keeps_params() {
        let cfg = OptimizerConfig::default();
        let mut p = scalar_map(0.7);
        let mut s = AdamState::new(&p);
        for _ in 0..5 {
            adam_step(&mut p, &scalar_map(0.0), &mut s, 1e-3, &cfg).unwrap();
        }
        assert_eq!(p, scalar_map(0.7));
    }

    #[test]
    fn first_step_moves_by_lr() {
        let cfg = OptimizerConfig::default();
        for g in [0.3f32, -2.0, 1e-3] {
            let mut p = scalar_map(1.0);
            let mut s = AdamState::new(&p);
            adam_step(&mut p, &scalar_map(g), &mut s, 1e-3, &cfg).unwrap();
            let delta = p.get("w").unwrap().data()[0] - 1.0;
            assert!((delta + g.signum() * 1e-3).abs() < 1e-6, "g={g} delta={delta}");
        }
    }

    #[test]
    fn missing_grad_is_usage_error() {
        let cfg = OptimizerConfig::default();
        let mut p = scalar_map(1.0);
        let mut s = AdamState::new(&p);
        let err = adam_step(&mut p, &ParamMap::new(), &mut s, 1e-3, &cfg).unwrap_err();
        assert!(matches!(err, Error::Usage(_)));
    }

    #[test]
    fn validation() {
        assert!(OptimizerConfig { beta1: 0.9999, ..Default::default() }.validate().is_err());
        assert!(OptimizerConfig { learning_rate: 0.0, ..Default::default() }.validate().is_err());
        OptimizerConfig::default().validate().unwrap();
    }
}
