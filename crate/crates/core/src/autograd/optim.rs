use serde::{Deserialize, Serialize};

use crate::error::{Result, VadError};

/// RMSprop hyperparameters and per-parameter running averages of `g²`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerState {
    pub lr: f64,
    pub rho: f64,
    pub eps: f64,
    /// One buffer per parameter tensor, in the model's parameter order.
    pub square_avg: Vec<Vec<f64>>,
}

impl OptimizerState {
    pub fn new(lr: f64, rho: f64, eps: f64) -> Result<Self> {
        if !(lr > 0.0) || !(rho > 0.0 && rho < 1.0) || !(eps > 0.0) {
            return Err(VadError::config(format!(
                "invalid RMSprop settings lr={lr} rho={rho} eps={eps}"
            )));
        }
        Ok(OptimizerState {
            lr,
            rho,
            eps,
            square_avg: Vec::new(),
        })
    }

    /// Applies one update to every `(param, grad)` slot, lazily allocating
    /// state on first use.
    pub fn step<'a>(&mut self, slots: impl IntoIterator<Item = (&'a mut [f64], &'a [f64])>) -> Result<()> {
        for (idx, (param, grad)) in slots.into_iter().enumerate() {
            if idx == self.square_avg.len() {
                self.square_avg.push(vec![0.0; param.len()]);
            }
            let v = &mut self.square_avg[idx];
            if v.len() != param.len() || grad.len() != param.len() {
                return Err(VadError::config(format!(
                    "optimizer slot {idx}: param {} / grad {} / state {} lengths differ",
                    param.len(),
                    grad.len(),
                    v.len()
                )));
            }
            rmsprop_step(param, grad, v, self.lr, self.rho, self.eps);
        }
        Ok(())
    }
}

/// `v ← ρv + (1-ρ)g²;  p ← p - lr·g / (√v + ε)`.
pub fn rmsprop_step(param: &mut [f64], grad: &[f64], square_avg: &mut [f64], lr: f64, rho: f64, eps: f64) {
    for ((p, &g), v) in param.iter_mut().zip(grad).zip(square_avg.iter_mut()) {
        *v = rho * *v + (1.0 - rho) * g * g;
        *p -= lr * g / (v.sqrt() + eps);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_leaves_params() {
        let mut p = vec![0.5, -1.25];
        let mut v = vec![0.3, 0.0];
        rmsprop_step(&mut p, &[0.0, 0.0], &mut v, 0.01, 0.9, 1e-8);
        assert_eq!(p, vec![0.5, -1.25]);
        assert!(v.iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn single_scalar_step() {
        let mut p = [0.0];
        let mut v = [0.0];
        rmsprop_step(&mut p, &[1.0], &mut v, 0.01, 0.9, 1e-8);
        assert!((v[0] - 0.1).abs() < 1e-15);
        let expected = -0.01 / (0.1f64.sqrt() + 1e-8);
        assert!((p[0] - expected).abs() < 1e-15);
    }

    #[test]
    fn steady_gradient_step_tends_to_lr() {
        let mut p = [0.0];
        let mut v = [0.0];
        let mut last = 0.0;
        for _ in 0..500 {
            let before = p[0];
            rmsprop_step(&mut p, &[0.3], &mut v, 0.01, 0.9, 1e-8);
            last = before - p[0];
        }
        assert!((v[0] - 0.09).abs() < 1e-12);
        assert!((last - 0.01).abs() < 1e-8);
    }

    #[test]
    fn state_tracks_slots() {
        let mut opt = OptimizerState::new(0.01, 0.9, 1e-8).unwrap();
        let mut a = vec![1.0; 3];
        let mut b = vec![2.0; 2];
        opt.step([(&mut a[..], &[1.0, 0.0, -1.0][..]), (&mut b[..], &[0.0, 0.0][..])]).unwrap();
        assert_eq!(opt.square_avg.len(), 2);
        assert!(a[0] < 1.0 && a[1] == 1.0 && a[2] > 1.0);
        let mut short = vec![0.0; 1];
        assert!(opt.step([(&mut short[..], &[0.0][..])]).is_err());
        assert!(OptimizerState::new(0.01, 1.0, 1e-8).is_err());
    }
}
