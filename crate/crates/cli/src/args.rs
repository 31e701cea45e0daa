use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "wavad", version, about = "Adversarially trained waveform voice activity detection")]
pub struct Cli {
    /// Base seed for corpus synthesis, initialization and batch drawing.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// TOML file with `preset`, `[network]`, `[schedule]` and `[eval]` tables; flags win.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Directory receiving every artifact of the run.
    #[arg(long, global = true, default_value = "out")]
    pub out_dir: PathBuf,

    #[command(subcommand)]
    pub command: Command,
}

impl Cli {
    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Synthesize a labeled noisy-speech corpus (WAV + label files + manifest).
    SynthCorpus(SynthArgs),
    /// Train a network on a corpus manifest.
    Train(TrainArgs),
    /// Train one network per alpha from a shared initialization and compare validation AUC.
    SweepAlpha(SweepArgs),
    /// Per-condition AUC report of a checkpoint on a test manifest.
    Eval(EvalArgs),
    /// Algorithmic delay of decoder kernel configurations.
    DelayTable(DelayArgs),
    /// ROC curves per SNR as an SVG plot.
    RocPlot(RocArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    Standard,
    Toy,
    Gradcheck,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SplitArg {
    Train,
    Test,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum AggregationArg {
    Average,
    Pool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Strict,
    Published,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub files: usize,
    #[arg(long, value_enum, default_value = "train")]
    pub split: SplitArg,
    /// Manifest and directory name; defaults to the split name.
    #[arg(long)]
    pub name: Option<String>,
    #[arg(long, default_value_t = 8000)]
    pub fs: u32,
    #[arg(long)]
    pub min_duration: Option<f64>,
    #[arg(long)]
    pub max_duration: Option<f64>,
    /// Comma-separated noise kinds (white, pink, hum, speech_shaped, bursty).
    #[arg(long, value_delimiter = ',')]
    pub noise_kinds: Option<Vec<String>>,
    /// Comma-separated SNRs in dB, `clean` allowed.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub snrs: Option<Vec<String>>,
    #[arg(long)]
    pub speech_fraction: Option<f64>,
}

/// Flags overriding network and schedule settings.
#[derive(Debug, Args, Default)]
pub struct ModelArgs {
    /// Network preset used when the config file has no `[network]` table.
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub lr0: Option<f64>,
    #[arg(long)]
    pub lr_decay: Option<f64>,
    #[arg(long)]
    pub forwards_per_backward: Option<usize>,
    #[arg(long)]
    pub files_per_forward: Option<usize>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub steps_per_epoch: Option<usize>,
    /// Seed of the batch-drawing stream; defaults to --seed.
    #[arg(long)]
    pub schedule_seed: Option<u64>,
    /// Decoder kernels `k1,k2,k3` (0 omits a layer).
    #[arg(long)]
    pub db_kernels: Option<String>,
    /// Train without the noise-type discriminator.
    #[arg(long)]
    pub no_discriminator: bool,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Training corpus manifest.
    #[arg(long)]
    pub train: PathBuf,
    /// Validation manifest scored after every epoch.
    #[arg(long)]
    pub validation: Option<PathBuf>,
    /// Continue from a checkpoint with training state.
    #[arg(long)]
    pub resume: Option<PathBuf>,
    #[command(flatten)]
    pub model: ModelArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub train: PathBuf,
    #[arg(long)]
    pub validation: PathBuf,
    /// Comma-separated alphas.
    #[arg(long, value_delimiter = ',', default_value = "0,0.01,0.1,1,10,100")]
    pub grid: Vec<f64>,
    /// Row label in the sweep CSV.
    #[arg(long, default_value = "synthetic")]
    pub set_name: String,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub eval: EvalFlags,
}

#[derive(Debug, Args, Default)]
pub struct EvalFlags {
    #[arg(long)]
    pub eval_files_per_forward: Option<usize>,
    #[arg(long, value_enum)]
    pub aggregation: Option<AggregationArg>,
    /// Average per-file AUCs inside a cell instead of pooling frames.
    #[arg(long)]
    pub per_file: bool,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[arg(long)]
    pub test: PathBuf,
    #[command(flatten)]
    pub eval: EvalFlags,
}

#[derive(Debug, Args)]
pub struct DelayArgs {
    #[arg(long, default_value_t = 8000)]
    pub fs: u32,
    #[arg(long, value_enum, default_value = "published")]
    pub mode: ModeArg,
    /// Encoder kernels `k1,k2,k3,k4`.
    #[arg(long)]
    pub eb_kernels: Option<String>,
    /// Decoder rows `k1,k2,k3`, repeatable; defaults to the 13-row study grid.
    #[arg(long)]
    pub db: Vec<String>,
    /// Directory of checkpoints named `db_<k1>_<k2>_<k3>.json` for the delay/AUC curve.
    #[arg(long, requires = "test")]
    pub checkpoint_dir: Option<PathBuf>,
    #[arg(long, requires = "checkpoint_dir")]
    pub test: Option<PathBuf>,
    #[command(flatten)]
    pub eval: EvalFlags,
}

#[derive(Debug, Args)]
pub struct RocArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[arg(long)]
    pub test: PathBuf,
    #[arg(long)]
    pub eval_files_per_forward: Option<usize>,
}
