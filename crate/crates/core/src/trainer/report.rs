use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Result, VadError};
use crate::model::NetworkConfig;
use crate::trainer::TrainSchedule;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub epoch: usize,
    /// Global optimizer step, counted from zero.
    pub step: usize,
    pub lr: f64,
    /// Frame-weighted VAD loss over the step's forward passes.
    pub loss_vad: f64,
    /// Frame-weighted noise-type loss; absent without a discriminator.
    pub loss_noise: Option<f64>,
    pub vad_frames: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub lr: f64,
    pub mean_loss_vad: f64,
    pub mean_loss_noise: Option<f64>,
    pub validation_auc: Option<f64>,
}

/// Everything a training run records. Only `wall_time_s` varies between
/// identical runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub config: NetworkConfig,
    pub schedule: TrainSchedule,
    pub init_seed: u64,
    pub steps: Vec<StepRecord>,
    pub epochs: Vec<EpochRecord>,
    pub optimizer_steps: usize,
    pub forward_passes: usize,
    pub wall_time_s: f64,
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

impl TrainReport {
    pub fn new(config: NetworkConfig, schedule: TrainSchedule, init_seed: u64) -> Self {
        TrainReport {
            config,
            schedule,
            init_seed,
            steps: Vec::new(),
            epochs: Vec::new(),
            optimizer_steps: 0,
            forward_passes: 0,
            wall_time_s: 0.0,
        }
    }

    /// The report with timing zeroed, for run-to-run comparisons.
    pub fn without_timing(&self) -> Self {
        TrainReport {
            wall_time_s: 0.0,
            ..self.clone()
        }
    }

    /// Appends a later segment of the same run (used after resuming).
    pub fn extend(&mut self, later: &TrainReport) {
        self.steps.extend_from_slice(&later.steps);
        self.epochs.extend_from_slice(&later.epochs);
        self.optimizer_steps += later.optimizer_steps;
        self.forward_passes += later.forward_passes;
        self.wall_time_s += later.wall_time_s;
    }

    /// `epoch,step,lr,loss_vad,loss_noise,vad_frames`.
    pub fn steps_csv(&self) -> String {
        let mut out = String::from("epoch,step,lr,loss_vad,loss_noise,vad_frames\n");
        for s in &self.steps {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                s.epoch,
                s.step,
                s.lr,
                s.loss_vad,
                opt(s.loss_noise),
                s.vad_frames
            )
            .unwrap();
        }
        out
    }

    /// `epoch,lr,mean_loss_vad,mean_loss_noise,validation_auc`.
    pub fn epochs_csv(&self) -> String {
        let mut out = String::from("epoch,lr,mean_loss_vad,mean_loss_noise,validation_auc\n");
        for e in &self.epochs {
            writeln!(
                out,
                "{},{},{},{},{}",
                e.epoch,
                e.lr,
                e.mean_loss_vad,
                opt(e.mean_loss_noise),
                opt(e.validation_auc)
            )
            .unwrap();
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| VadError::Format(e.to_string()))
    }

    /// Writes `steps.csv`, `epochs.csv` and `train_report.json` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("steps.csv"), self.steps_csv())?;
        std::fs::write(dir.join("epochs.csv"), self.epochs_csv())?;
        std::fs::write(dir.join("train_report.json"), self.to_json()?)?;
        Ok(())
    }
}
