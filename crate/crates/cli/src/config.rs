use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use wavad_core::evaluator::{parse_kernels, CellPooling, EvalOptions, NoiseAggregation};
use wavad_core::{NetworkConfig, TrainSchedule};

use crate::args::{AggregationArg, EvalFlags, ModelArgs, Preset};
use crate::usage;

/// Contents of a `--config` file.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub preset: Option<Preset>,
    pub network: Option<NetworkConfig>,
    pub schedule: Option<TrainSchedule>,
    pub eval: Option<EvalOptions>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(FileConfig::default());
        };
        if !path.exists() {
            return Err(usage(format!("config file {} does not exist", path.display())));
        }
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        toml::from_str(&text).map_err(|e| usage(format!("config file {}: {}", path.display(), e.message())))
    }
}

fn preset_config(preset: Preset, fs: u32) -> NetworkConfig {
    match preset {
        Preset::Standard => NetworkConfig::standard(fs),
        Preset::Toy => NetworkConfig::toy(),
        Preset::Gradcheck => NetworkConfig::gradcheck(),
    }
}

/// Network config: flag preset, else file `[network]`, else file preset, else standard.
pub fn resolve_network(file: &FileConfig, flags: &ModelArgs, fs: u32) -> Result<NetworkConfig> {
    let mut cfg = match (flags.preset, &file.network, file.preset) {
        (Some(p), _, _) => preset_config(p, fs),
        (None, Some(n), _) => n.clone(),
        (None, None, Some(p)) => preset_config(p, fs),
        (None, None, None) => NetworkConfig::standard(fs),
    };
    if let Some(text) = &flags.db_kernels {
        cfg.db_kernels = parse_kernels(text).map_err(|e| usage(e.to_string()))?;
    }
    if flags.no_discriminator {
        cfg.with_discriminator = false;
    }
    if let Some(alpha) = flags.alpha {
        cfg.alpha = alpha;
    }
    cfg.validate().map_err(|e| usage(e.to_string()))?;
    Ok(cfg)
}

/// Schedule: file `[schedule]` overridden by flags; the batch seed is
/// `--schedule-seed`, else `--seed`, else the file's, else 0.
pub fn resolve_schedule(file: &FileConfig, flags: &ModelArgs, seed: Option<u64>) -> Result<TrainSchedule> {
    let mut s = file.schedule.clone().unwrap_or_default();
    if let Some(v) = seed {
        s.seed = v;
    }
    macro_rules! apply {
        ($($field:ident),*) => {$(
            if let Some(v) = flags.$field {
                s.$field = v;
            }
        )*};
    }
    apply!(epochs, lr0, lr_decay, forwards_per_backward, files_per_forward, alpha, rho, eps);
    if let Some(v) = flags.steps_per_epoch {
        s.steps_per_epoch = Some(v);
    }
    if let Some(v) = flags.schedule_seed {
        s.seed = v;
    }
    s.validate().map_err(|e| usage(e.to_string()))?;
    Ok(s)
}

pub fn resolve_eval(file: &FileConfig, flags: &EvalFlags) -> Result<EvalOptions> {
    let mut e = file.eval.unwrap_or_default();
    if let Some(n) = flags.eval_files_per_forward {
        e.files_per_forward = n;
    }
    if let Some(a) = flags.aggregation {
        e.aggregation = match a {
            AggregationArg::Average => NoiseAggregation::Average,
            AggregationArg::Pool => NoiseAggregation::Pool,
        };
    }
    if flags.per_file {
        e.pooling = CellPooling::PerFile;
    }
    if e.files_per_forward == 0 {
        return Err(usage("eval files_per_forward must be positive"));
    }
    Ok(e)
}

/// Merged settings of one run, written as `run_config.toml`.
#[derive(Debug, Serialize)]
pub struct Echo<'a, T: Serialize> {
    pub command: &'a str,
    pub seed: u64,
    pub settings: T,
}

pub fn write_echo<T: Serialize>(out_dir: &Path, command: &str, seed: u64, settings: T) -> Result<()> {
    let echo = Echo { command, seed, settings };
    let text = toml::to_string_pretty(&echo).context("serializing config echo")?;
    std::fs::write(out_dir.join("run_config.toml"), text).context("writing run_config.toml")?;
    Ok(())
}
