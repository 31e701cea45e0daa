use serde::{Deserialize, Serialize};

/// Slope used by every leaky ReLU in the default network.
pub const LEAKY_SLOPE: f64 = 0.01;

/// Activation applied after a convolution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Activation {
    LeakyRelu { slope: f64 },
    Sigmoid,
    /// Softmax across channels, independently at every time step.
    SoftmaxOverChannels,
    Identity,
}

impl Activation {
    pub fn leaky() -> Self {
        Activation::LeakyRelu { slope: LEAKY_SLOPE }
    }

    /// Applies the activation to a channel-major `channels × length` block.
    pub fn apply(&self, pre: &[f64], channels: usize, length: usize) -> Vec<f64> {
        match *self {
            Activation::LeakyRelu { slope } => pre.iter().map(|&x| leaky_relu(x, slope)).collect(),
            Activation::Sigmoid => pre.iter().map(|&x| sigmoid(x)).collect(),
            Activation::Identity => pre.to_vec(),
            Activation::SoftmaxOverChannels => {
                let mut out = vec![0.0; pre.len()];
                let mut column = vec![0.0; channels];
                for t in 0..length {
                    for (c, v) in column.iter_mut().enumerate() {
                        *v = pre[c * length + t];
                    }
                    for (c, p) in softmax_over_channels(&column).into_iter().enumerate() {
                        out[c * length + t] = p;
                    }
                }
                out
            }
        }
    }

    /// Maps the gradient w.r.t. the activation output to the gradient
    /// w.r.t. its input.
    pub fn backward(
        &self,
        pre: &[f64],
        out: &[f64],
        grad_out: &[f64],
        channels: usize,
        length: usize,
    ) -> Vec<f64> {
        match *self {
            Activation::LeakyRelu { slope } => pre
                .iter()
                .zip(grad_out)
                .map(|(&x, &g)| if x >= 0.0 { g } else { slope * g })
                .collect(),
            Activation::Sigmoid => out
                .iter()
                .zip(grad_out)
                .map(|(&y, &g)| g * y * (1.0 - y))
                .collect(),
            Activation::Identity => grad_out.to_vec(),
            Activation::SoftmaxOverChannels => {
                // dz_c = y_c * (g_c - sum_j y_j g_j)
                let mut grad_in = vec![0.0; out.len()];
                for t in 0..length {
                    let mut dot = 0.0;
                    for c in 0..channels {
                        dot += out[c * length + t] * grad_out[c * length + t];
                    }
                    for c in 0..channels {
                        let i = c * length + t;
                        grad_in[i] = out[i] * (grad_out[i] - dot);
                    }
                }
                grad_in
            }
        }
    }
}

pub fn leaky_relu(x: f64, slope: f64) -> f64 {
    if x >= 0.0 {
        x
    } else {
        slope * x
    }
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Numerically stable softmax of one time step's channel values.
pub fn softmax_over_channels(column: &[f64]) -> Vec<f64> {
    let max = column.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = column.iter().map(|&v| (v - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn scalar_examples() {
        assert_eq!(leaky_relu(-2.0, 0.01), -0.02);
        assert_eq!(leaky_relu(3.0, 0.01), 3.0);
        assert_eq!(sigmoid(0.0), 0.5);
        for p in softmax_over_channels(&[1.3; 5]) {
            assert!((p - 0.2).abs() < 1e-15);
        }
    }

    #[test]
    fn sigmoid_saturates_without_nan() {
        assert_eq!(sigmoid(-1000.0), 0.0);
        assert_eq!(sigmoid(1000.0), 1.0);
    }

    proptest! {
        #[test]
        fn softmax_is_a_distribution(column in prop::collection::vec(-50.0f64..50.0, 1..12)) {
            let p = softmax_over_channels(&column);
            prop_assert!(p.iter().all(|&v| v >= 0.0));
            prop_assert!((p.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
        }
    }
}
