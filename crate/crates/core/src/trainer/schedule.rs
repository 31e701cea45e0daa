use serde::{Deserialize, Serialize};

use crate::error::{Result, VadError};

/// Training hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainSchedule {
    pub epochs: usize,
    pub lr0: f64,
    /// Learning-rate factor applied after every epoch.
    pub lr_decay: f64,
    /// Forward passes whose gradients are merged into one optimizer step.
    pub forwards_per_backward: usize,
    /// Files of one (noise type, SNR) cell concatenated per forward pass.
    pub files_per_forward: usize,
    pub alpha: f64,
    /// Seed of the batch-drawing streams.
    pub seed: u64,
    pub rho: f64,
    pub eps: f64,
    /// Optimizer steps per epoch; by default one pass over the corpus in expectation.
    pub steps_per_epoch: Option<usize>,
}

impl Default for TrainSchedule {
    fn default() -> Self {
        TrainSchedule {
            epochs: 30,
            lr0: 0.01,
            lr_decay: 0.7,
            forwards_per_backward: 3,
            files_per_forward: 10,
            alpha: 0.1,
            seed: 0,
            rho: 0.9,
            eps: 1e-8,
            steps_per_epoch: None,
        }
    }
}

impl TrainSchedule {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(VadError::Config(format!("schedule: {what}")));
        if self.epochs == 0 {
            return bad("epochs must be positive");
        }
        if !(self.lr0 > 0.0 && self.lr0.is_finite()) {
            return bad("lr0 must be positive");
        }
        if !(self.lr_decay > 0.0 && self.lr_decay.is_finite()) {
            return bad("lr_decay must be positive");
        }
        if self.forwards_per_backward == 0 || self.files_per_forward == 0 {
            return bad("forwards_per_backward and files_per_forward must be positive");
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return bad("alpha must be finite and non-negative");
        }
        if !(self.rho > 0.0 && self.rho < 1.0) || !(self.eps > 0.0) {
            return bad("rho must lie in (0, 1) and eps must be positive");
        }
        if self.steps_per_epoch == Some(0) {
            return bad("steps_per_epoch must be positive");
        }
        Ok(())
    }

    /// `lr0 · lr_decay^epoch`, epochs counted from zero.
    pub fn learning_rate(&self, epoch: usize) -> f64 {
        self.lr0 * self.lr_decay.powi(epoch as i32)
    }

    pub fn files_per_step(&self) -> usize {
        self.forwards_per_backward * self.files_per_forward
    }

    pub fn steps_for(&self, corpus_files: usize) -> usize {
        self.steps_per_epoch
            .unwrap_or_else(|| corpus_files.div_ceil(self.files_per_step()).max(1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn learning_rate_sequence() {
        let s = TrainSchedule::default();
        assert_eq!(s.learning_rate(0), 0.01);
        assert!((s.learning_rate(2) - 0.0049).abs() < 1e-15);
        for e in 0..30 {
            assert!((s.learning_rate(e) - 0.01 * 0.7f64.powi(e as i32)).abs() <= 1e-18);
        }
    }

    #[test]
    fn steps_cover_the_corpus() {
        let s = TrainSchedule::default();
        assert_eq!(s.steps_for(1000), 34);
        assert_eq!(s.steps_for(0), 1);
        let fixed = TrainSchedule {
            steps_per_epoch: Some(5),
            ..s
        };
        assert_eq!(fixed.steps_for(1000), 5);
    }

    #[test]
    fn rejects_bad_values() {
        for s in [
            TrainSchedule { epochs: 0, ..Default::default() },
            TrainSchedule { lr0: 0.0, ..Default::default() },
            TrainSchedule { alpha: -0.1, ..Default::default() },
            TrainSchedule { rho: 1.0, ..Default::default() },
            TrainSchedule { files_per_forward: 0, ..Default::default() },
        ] {
            assert!(s.validate().is_err());
        }
        assert!(TrainSchedule::default().validate().is_ok());
    }
}
