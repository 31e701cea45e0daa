//! Training loop: concatenated-file batches drawn round-robin over
//! (noise type, SNR) cells, several forward passes merged per RMSprop step,
//! exponential learning-rate decay and resumable checkpoints.

mod report;
mod schedule;
mod sweep;

use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use report::{EpochRecord, StepRecord, TrainReport};
pub use schedule::TrainSchedule;
pub use sweep::{alpha_sweep, sweep_csv, SweepResult, ALPHA_GRID};

use crate::autograd::OptimizerState;
use crate::checkpoint::{Checkpoint, TrainingState};
use crate::corpus::{concat_batch, conditions, Condition, Utterance};
use crate::error::{Result, VadError};
use crate::evaluator::{condition_report, EvalOptions};
use crate::model::{frame_label_alignment, BackwardSpec, NetworkGrads, VadNetwork};
use crate::seed::derive_seed;

const STEP_STREAM: u64 = 0x5354_4550;

/// Merged gradient of one optimizer step and its frame-weighted losses.
#[derive(Debug, Clone)]
pub struct StepGradients {
    pub grads: NetworkGrads,
    pub loss_vad: f64,
    pub loss_noise: Option<f64>,
    pub vad_frames: usize,
}

/// Where a run writes its side artifacts.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Held-out files scored after every epoch.
    pub validation: Option<Vec<Utterance>>,
    pub validation_options: EvalOptions,
    /// Directory for the diagnostic checkpoint written on a non-finite loss.
    pub diagnostic_dir: Option<PathBuf>,
    /// If set, a resumable checkpoint is rewritten here after every epoch.
    pub epoch_checkpoint: Option<PathBuf>,
}

/// A network, its optimizer and training progress.
#[derive(Debug, Clone)]
pub struct Trainer {
    pub net: VadNetwork,
    pub schedule: TrainSchedule,
    pub optimizer: OptimizerState,
    pub epochs_completed: usize,
    pub steps_completed: usize,
    init_seed: u64,
}

impl Trainer {
    /// Starts training `net`; `init_seed` is only recorded in checkpoints.
    pub fn new(mut net: VadNetwork, schedule: TrainSchedule, init_seed: u64) -> Result<Self> {
        schedule.validate()?;
        net.set_alpha(schedule.alpha)?;
        let optimizer = OptimizerState::new(schedule.lr0, schedule.rho, schedule.eps)?;
        Ok(Trainer {
            net,
            schedule,
            optimizer,
            epochs_completed: 0,
            steps_completed: 0,
            init_seed,
        })
    }

    /// Continues from a checkpoint written by [`Trainer::checkpoint`].
    pub fn resume(checkpoint: &Checkpoint, schedule: TrainSchedule) -> Result<Self> {
        let state = checkpoint
            .training
            .as_ref()
            .ok_or_else(|| VadError::Checkpoint("checkpoint has no training state".into()))?;
        let mut trainer = Trainer::new(checkpoint.to_network()?, schedule, checkpoint.seed)?;
        trainer.optimizer = state.optimizer.clone();
        trainer.epochs_completed = state.epochs_completed;
        trainer.steps_completed = state.steps_completed;
        Ok(trainer)
    }

    pub fn checkpoint(&self) -> Checkpoint {
        Checkpoint::from_network(
            &self.net,
            self.init_seed,
            Some(TrainingState {
                epochs_completed: self.epochs_completed,
                steps_completed: self.steps_completed,
                optimizer: self.optimizer.clone(),
            }),
        )
    }

    pub fn init_seed(&self) -> u64 {
        self.init_seed
    }

    fn check_pool(&self, pool: &[Utterance]) -> Result<Vec<Condition>> {
        let mut cells = conditions(pool);
        // SNR-major order so consecutive forwards carry different noise types.
        cells.sort_by(|a, b| a.snr.cmp(&b.snr).then(a.noise_type.cmp(&b.noise_type)));
        if cells.is_empty() {
            return Err(VadError::Data("training corpus is empty".into()));
        }
        let classes = self.net.config().noise_classes();
        for &cell in &cells {
            let count = pool.iter().filter(|u| u.condition() == cell).count();
            if count < self.schedule.files_per_forward {
                return Err(VadError::Data(format!(
                    "cell (noise type {}, {}) has {count} files, fewer than files_per_forward = {}",
                    cell.noise_type, cell.snr, self.schedule.files_per_forward
                )));
            }
            if self.net.config().with_discriminator && cell.noise_type >= classes {
                return Err(VadError::Data(format!(
                    "noise type {} is outside the discriminator's {classes} classes",
                    cell.noise_type
                )));
            }
        }
        if let Some(u) = pool.iter().find(|u| u.fs != self.net.config().fs) {
            return Err(VadError::Data(format!(
                "corpus file at {} Hz, network expects {} Hz",
                u.fs,
                self.net.config().fs
            )));
        }
        Ok(cells)
    }

    /// Batches for global step `step`: forward `i` uses cell
    /// `(step · forwards + i) mod cells`, files drawn from a per-step stream.
    pub fn draw_batches(&self, pool: &[Utterance], cells: &[Condition], step: usize) -> Result<Vec<Utterance>> {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(self.schedule.seed, &[STEP_STREAM, step as u64]));
        let fpb = self.schedule.forwards_per_backward;
        (0..fpb)
            .map(|i| {
                let cell = cells[(step * fpb + i) % cells.len()];
                concat_batch(pool, cell, self.schedule.files_per_forward, &mut rng)
            })
            .collect()
    }

    /// Gradient of the frame-averaged losses over `batches` at the current
    /// parameters. Each forward's contribution is weighted by its share of
    /// the step's frames; nothing is clipped or rescaled.
    pub fn step_gradients(&self, batches: &[Utterance]) -> Result<StepGradients> {
        let mut prepared = Vec::with_capacity(batches.len());
        for b in batches {
            let counts = self.net.output_frames(b.samples.len())?;
            prepared.push(counts);
        }
        let total_vad: usize = prepared.iter().map(|c| c.vad).sum();
        let total_noise: usize = prepared.iter().map(|c| c.noise.unwrap_or(0)).sum();

        let mut grads = NetworkGrads::zeros_like(&self.net);
        let mut loss_vad = 0.0;
        let mut loss_noise = if self.net.discriminator().is_empty() { None } else { Some(0.0) };
        for (batch, counts) in batches.iter().zip(&prepared) {
            let trace = self.net.forward(&batch.samples)?;
            let vad_labels = frame_label_alignment(counts.vad, &batch.vad_labels)?;
            let noise_labels = match counts.noise {
                Some(n) => frame_label_alignment(n, &batch.noise_labels())?,
                None => Vec::new(),
            };
            let vad_weight = counts.vad as f64 / total_vad as f64;
            let noise_weight = counts.noise.map_or(0.0, |n| n as f64 / total_noise as f64);
            let spec = BackwardSpec {
                vad_weight,
                noise_weight,
                alpha: self.schedule.alpha,
            };
            let (g, losses) = self.net.backward(&trace, &vad_labels, &noise_labels, spec)?;
            grads.add_scaled(&g, 1.0);
            loss_vad += vad_weight * losses.vad.unwrap_or(0.0);
            if let (Some(acc), Some(l)) = (loss_noise.as_mut(), losses.noise) {
                *acc += noise_weight * l;
            }
        }
        Ok(StepGradients {
            grads,
            loss_vad,
            loss_noise,
            vad_frames: total_vad,
        })
    }

    fn abort_non_finite(&self, diagnostic_dir: Option<&Path>) -> VadError {
        let checkpoint = diagnostic_dir.and_then(|dir| {
            let path = dir.join(format!("diagnostic_step{}.json", self.steps_completed));
            std::fs::create_dir_all(dir).ok()?;
            self.checkpoint().save(&path).ok()?;
            Some(path)
        });
        VadError::NonFiniteLoss {
            step: self.steps_completed,
            checkpoint,
        }
    }

    /// One optimizer step on already-drawn batches.
    pub fn apply_step(&mut self, batches: &[Utterance], diagnostic_dir: Option<&Path>) -> Result<StepRecord> {
        let epoch = self.epochs_completed;
        let lr = self.schedule.learning_rate(epoch);
        let step = self.step_gradients(batches)?;
        let finite = step.loss_vad.is_finite()
            && step.loss_noise.map_or(true, f64::is_finite)
            && step.grads.blocks().iter().all(|b| b.iter().all(f64::is_finite));
        if !finite {
            return Err(self.abort_non_finite(diagnostic_dir));
        }
        self.net.zero_grad();
        self.net.accumulate(&step.grads);
        self.optimizer.lr = lr;
        self.optimizer.step(self.net.param_slots())?;
        let record = StepRecord {
            epoch,
            step: self.steps_completed,
            lr,
            loss_vad: step.loss_vad,
            loss_noise: step.loss_noise,
            vad_frames: step.vad_frames,
        };
        self.steps_completed += 1;
        Ok(record)
    }

    /// Runs one epoch, appending to `report`.
    pub fn run_epoch(&mut self, pool: &[Utterance], options: &RunOptions, report: &mut TrainReport) -> Result<()> {
        let cells = self.check_pool(pool)?;
        let epoch = self.epochs_completed;
        let steps = self.schedule.steps_for(pool.len());
        let first = report.steps.len();
        for _ in 0..steps {
            let batches = self.draw_batches(pool, &cells, self.steps_completed)?;
            let record = self.apply_step(&batches, options.diagnostic_dir.as_deref())?;
            report.steps.push(record);
            report.optimizer_steps += 1;
            report.forward_passes += batches.len();
        }
        let records = &report.steps[first..];
        let n = records.len() as f64;
        let mean_loss_vad = records.iter().map(|r| r.loss_vad).sum::<f64>() / n;
        let mean_loss_noise = records
            .iter()
            .map(|r| r.loss_noise)
            .sum::<Option<f64>>()
            .map(|s| s / n);
        let validation_auc = match &options.validation {
            Some(v) if !v.is_empty() => condition_report(&self.net, v, &options.validation_options)?.mean_auc(),
            _ => None,
        };
        report.epochs.push(EpochRecord {
            epoch,
            lr: self.schedule.learning_rate(epoch),
            mean_loss_vad,
            mean_loss_noise,
            validation_auc,
        });
        self.epochs_completed += 1;
        if let Some(path) = &options.epoch_checkpoint {
            self.checkpoint().save(path)?;
        }
        Ok(())
    }

    /// Trains until `schedule.epochs` epochs are complete.
    pub fn run(&mut self, pool: &[Utterance], options: &RunOptions) -> Result<TrainReport> {
        let start = Instant::now();
        let mut report = TrainReport::new(self.net.config().clone(), self.schedule.clone(), self.init_seed);
        while self.epochs_completed < self.schedule.epochs {
            self.run_epoch(pool, options, &mut report)?;
        }
        report.wall_time_s = start.elapsed().as_secs_f64();
        Ok(report)
    }
}

/// Trains `net` on `corpus` with `schedule` and no side artifacts.
pub fn train(net: VadNetwork, corpus: &[Utterance], schedule: &TrainSchedule, init_seed: u64) -> Result<(VadNetwork, TrainReport)> {
    let mut trainer = Trainer::new(net, schedule.clone(), init_seed)?;
    let report = trainer.run(corpus, &RunOptions::default())?;
    Ok((trainer.net, report))
}
