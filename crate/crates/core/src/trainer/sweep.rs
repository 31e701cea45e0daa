use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::corpus::Utterance;
use crate::error::{Result, VadError};
use crate::evaluator::{condition_report, ConditionReport, EvalOptions};
use crate::model::VadNetwork;
use crate::trainer::{RunOptions, TrainReport, TrainSchedule, Trainer};

/// Adversarial weights compared in the sweep.
pub const ALPHA_GRID: [f64; 6] = [0.0, 0.01, 0.1, 1.0, 10.0, 100.0];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub alpha: f64,
    pub mean_auc: Option<f64>,
    pub report: ConditionReport,
    pub train: TrainReport,
}

/// Trains one copy of `initial` per alpha (all from the same parameters)
/// and scores each on `validation`.
pub fn alpha_sweep(
    initial: &VadNetwork,
    init_seed: u64,
    pool: &[Utterance],
    validation: &[Utterance],
    schedule: &TrainSchedule,
    grid: &[f64],
    eval: &EvalOptions,
) -> Result<Vec<SweepResult>> {
    if grid.is_empty() {
        return Err(VadError::Config("alpha grid is empty".into()));
    }
    grid.iter()
        .map(|&alpha| {
            let schedule = TrainSchedule {
                alpha,
                ..schedule.clone()
            };
            let mut trainer = Trainer::new(initial.clone(), schedule, init_seed)?;
            let train = trainer.run(pool, &RunOptions::default())?;
            let report = condition_report(&trainer.net, validation, eval)?;
            Ok(SweepResult {
                alpha,
                mean_auc: report.mean_auc(),
                report,
                train,
            })
        })
        .collect()
}

/// One header row of alphas and one row of mean validation AUCs.
pub fn sweep_csv(set_name: &str, results: &[SweepResult]) -> String {
    let mut out = String::from("set");
    for r in results {
        write!(out, ",{}", r.alpha).unwrap();
    }
    out.push('\n');
    out.push_str(set_name);
    for r in results {
        match r.mean_auc {
            Some(a) => write!(out, ",{a}").unwrap(),
            None => out.push_str(",NA"),
        }
    }
    out.push('\n');
    out
}
