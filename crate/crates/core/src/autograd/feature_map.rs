use crate::error::{Result, VadError};

/// A `channels × length` activation with a gradient buffer of the same shape.
///
/// Storage is channel-major: the samples of channel `c` occupy
/// `values[c * length .. (c + 1) * length]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMap {
    channels: usize,
    length: usize,
    values: Vec<f64>,
    grad: Vec<f64>,
}

impl FeatureMap {
    pub fn zeros(channels: usize, length: usize) -> Self {
        FeatureMap {
            channels,
            length,
            values: vec![0.0; channels * length],
            grad: vec![0.0; channels * length],
        }
    }

    pub fn from_values(channels: usize, length: usize, values: Vec<f64>) -> Result<Self> {
        if channels == 0 || length == 0 {
            return Err(VadError::config(format!(
                "feature map must have positive shape, got {channels}x{length}"
            )));
        }
        if values.len() != channels * length {
            return Err(VadError::config(format!(
                "feature map {channels}x{length} needs {} values, got {}",
                channels * length,
                values.len()
            )));
        }
        let grad = vec![0.0; values.len()];
        Ok(FeatureMap {
            channels,
            length,
            values,
            grad,
        })
    }

    /// Single-channel map holding a raw waveform.
    pub fn from_signal(samples: &[f64]) -> Result<Self> {
        Self::from_values(1, samples.len(), samples.to_vec())
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn grad(&self) -> &[f64] {
        &self.grad
    }

    pub fn grad_mut(&mut self) -> &mut [f64] {
        &mut self.grad
    }

    pub fn row(&self, channel: usize) -> &[f64] {
        &self.values[channel * self.length..(channel + 1) * self.length]
    }

    pub fn value(&self, channel: usize, t: usize) -> f64 {
        self.values[channel * self.length + t]
    }

    /// Values of every channel at time step `t`.
    pub fn column(&self, t: usize) -> Vec<f64> {
        (0..self.channels).map(|c| self.value(c, t)).collect()
    }

    pub fn zero_grad(&mut self) {
        self.grad.iter_mut().for_each(|g| *g = 0.0);
    }

    pub fn accumulate_grad(&mut self, grad: &[f64]) -> Result<()> {
        if grad.len() != self.grad.len() {
            return Err(VadError::config(format!(
                "gradient of {} elements does not match feature map {}x{}",
                grad.len(),
                self.channels,
                self.length
            )));
        }
        for (g, d) in self.grad.iter_mut().zip(grad) {
            *g += d;
        }
        Ok(())
    }
}
