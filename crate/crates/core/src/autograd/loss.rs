//! Frame-averaged classification losses with log clamping.

use crate::error::{Result, VadError};

/// Probabilities are clamped to `[PROB_FLOOR, 1 - PROB_FLOOR]` before any log.
pub const PROB_FLOOR: f64 = 1e-12;

/// Mean loss over frames and its gradient w.r.t. the loss input.
#[derive(Debug, Clone, PartialEq)]
pub struct LossValue {
    pub value: f64,
    pub grad: Vec<f64>,
}

fn clamp_prob(p: f64) -> (f64, bool) {
    if p < PROB_FLOOR {
        (PROB_FLOOR, true)
    } else if p > 1.0 - PROB_FLOOR {
        (1.0 - PROB_FLOOR, true)
    } else {
        (p, false)
    }
}

/// `-Σ_i t_i log p_i` averaged over frames, with one-hot targets given as
/// class indices.
///
/// `probs` is channel-major `[classes × frames]`; `grad` is w.r.t. `probs`
/// (zero where the clamp is active).
pub fn cross_entropy(probs: &[f64], classes: usize, targets: &[usize]) -> Result<LossValue> {
    let frames = targets.len();
    if frames == 0 || probs.len() != classes * frames {
        return Err(VadError::Alignment(format!(
            "{} probabilities cannot be split into {classes} classes x {frames} frames",
            probs.len()
        )));
    }
    let mut value = 0.0;
    let mut grad = vec![0.0; probs.len()];
    for (t, &class) in targets.iter().enumerate() {
        if class >= classes {
            return Err(VadError::Alignment(format!(
                "target class {class} out of range for {classes} classes"
            )));
        }
        let i = class * frames + t;
        let (p, clamped) = clamp_prob(probs[i]);
        value -= p.ln();
        if !clamped {
            grad[i] = -1.0 / (p * frames as f64);
        }
    }
    Ok(LossValue {
        value: value / frames as f64,
        grad,
    })
}

/// Gradient of the mean softmax cross-entropy w.r.t. the logits,
/// `(p - onehot(t)) / frames`, given the softmax output `probs`.
pub fn softmax_cross_entropy_logit_grad(probs: &[f64], classes: usize, targets: &[usize]) -> Vec<f64> {
    let frames = targets.len();
    debug_assert_eq!(probs.len(), classes * frames);
    let mut grad: Vec<f64> = probs.iter().map(|p| p / frames as f64).collect();
    for (t, &class) in targets.iter().enumerate() {
        grad[class * frames + t] -= 1.0 / frames as f64;
    }
    grad
}

/// `-[t log p + (1-t) log(1-p)]` averaged over frames; `grad` is w.r.t. `p`.
pub fn binary_cross_entropy(p: &[f64], targets: &[u8]) -> Result<LossValue> {
    if p.is_empty() || p.len() != targets.len() {
        return Err(VadError::Alignment(format!(
            "{} scores vs {} labels",
            p.len(),
            targets.len()
        )));
    }
    let frames = p.len() as f64;
    let mut value = 0.0;
    let mut grad = vec![0.0; p.len()];
    for ((&raw, &t), g) in p.iter().zip(targets).zip(grad.iter_mut()) {
        let (q, clamped) = clamp_prob(raw);
        let t = f64::from(t);
        value -= t * q.ln() + (1.0 - t) * (1.0 - q).ln();
        if !clamped {
            *g = (-t / q + (1.0 - t) / (1.0 - q)) / frames;
        }
    }
    Ok(LossValue {
        value: value / frames,
        grad,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autograd::activation::softmax_over_channels;

    #[test]
    fn cross_entropy_examples() {
        let perfect = cross_entropy(&[1.0, 0.0, 0.0], 3, &[0]).unwrap();
        assert!(perfect.value.abs() < 1e-11);
        let uniform = cross_entropy(&[0.2; 5], 5, &[3]).unwrap();
        assert!((uniform.value - 5f64.ln()).abs() < 1e-12);
        let ce = cross_entropy(&[0.7, 0.2, 0.1], 3, &[0]).unwrap();
        assert!((ce.value - 0.356_674_943_938_732_4).abs() < 1e-12);
    }

    #[test]
    fn cross_entropy_clamps_zero_probability() {
        let ce = cross_entropy(&[0.0, 1.0], 2, &[0]).unwrap();
        assert!(ce.value.is_finite());
        assert!((ce.value + PROB_FLOOR.ln()).abs() < 1e-9);
        assert!(ce.grad.iter().all(|g| g.is_finite()));
    }

    #[test]
    fn binary_cross_entropy_examples() {
        let half = binary_cross_entropy(&[0.5], &[1]).unwrap();
        assert!((half.value - 2f64.ln()).abs() < 1e-12);
        let sure = binary_cross_entropy(&[1.0], &[1]).unwrap();
        assert!(sure.value < 1e-11);
        let wrong = binary_cross_entropy(&[0.9], &[0]).unwrap();
        assert!((wrong.value - 2.302_585_092_994_045_5).abs() < 1e-9);
        let floor = binary_cross_entropy(&[0.0, 1.0], &[1, 0]).unwrap();
        assert!(floor.value.is_finite());
    }

    #[test]
    fn loss_shape_errors() {
        assert!(cross_entropy(&[0.5, 0.5], 2, &[]).is_err());
        assert!(cross_entropy(&[0.5, 0.5], 2, &[2]).is_err());
        assert!(binary_cross_entropy(&[0.5, 0.5], &[1]).is_err());
    }

    #[test]
    fn fused_logit_grad_matches_chain_rule() {
        let logits = [0.3, -1.2, 2.0];
        let probs = softmax_over_channels(&logits);
        let target = [1usize];
        let fused = softmax_cross_entropy_logit_grad(&probs, 3, &target);
        let dp = cross_entropy(&probs, 3, &target).unwrap().grad;
        let dot: f64 = probs.iter().zip(&dp).map(|(a, b)| a * b).sum();
        for c in 0..3 {
            let chained = probs[c] * (dp[c] - dot);
            assert!((chained - fused[c]).abs() < 1e-12);
        }
    }

    #[test]
    fn bce_grad_matches_finite_difference() {
        let p = [0.2, 0.7, 0.55];
        let t = [0u8, 1, 0];
        let analytic = binary_cross_entropy(&p, &t).unwrap().grad;
        let eps = 1e-6;
        for i in 0..p.len() {
            let mut hi = p;
            let mut lo = p;
            hi[i] += eps;
            lo[i] -= eps;
            let fd = (binary_cross_entropy(&hi, &t).unwrap().value
                - binary_cross_entropy(&lo, &t).unwrap().value)
                / (2.0 * eps);
            assert!((fd - analytic[i]).abs() < 1e-7);
        }
    }
}
