use crate::autograd::FeatureMap;
use crate::error::{Result, VadError};

/// Identity on values; multiplies gradients by `-alpha` on the way back.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradientReversal {
    alpha: f64,
}

impl GradientReversal {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha >= 0.0) || !alpha.is_finite() {
            return Err(VadError::config(format!(
                "gradient reversal scale must be finite and nonnegative, got {alpha}"
            )));
        }
        Ok(GradientReversal { alpha })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn forward<'a>(&self, input: &'a FeatureMap) -> &'a FeatureMap {
        input
    }

    pub fn backward(&self, upstream: &[f64]) -> Vec<f64> {
        gradient_reversal(upstream, self.alpha)
    }
}

pub fn gradient_reversal(upstream: &[f64], alpha: f64) -> Vec<f64> {
    upstream.iter().map(|g| -alpha * g).collect()
}
