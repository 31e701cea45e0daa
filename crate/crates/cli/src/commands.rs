use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use wavad_core::checkpoint::{load_network, Checkpoint};
use wavad_core::corpus::{generate_corpus, load_corpus, write_corpus, NoiseKind, SyntheticCorpusSpec};
use wavad_core::delay::{delay_table, published_grid, write_delay_csv, DelayMode, PUBLISHED_DELAYS};
use wavad_core::evaluator::{
    condition_report, delay_curve_csv, delay_performance_curve, line_plot, parse_kernels, roc, score_corpus,
    DelayCurveEntry, EvalOptions, Series,
};
use wavad_core::model::DEFAULT_EB_KERNELS;
use wavad_core::trainer::{alpha_sweep, sweep_csv, RunOptions, Trainer};
use wavad_core::{NetworkConfig, Snr, TrainSchedule, Utterance, VadError, VadNetwork};

use crate::args::{Cli, Command, DelayArgs, EvalArgs, ModeArg, RocArgs, SplitArg, SweepArgs, SynthArgs, TrainArgs};
use crate::config::{resolve_eval, resolve_network, resolve_schedule, write_echo, FileConfig};
use crate::usage;

pub fn run(cli: &Cli) -> Result<()> {
    let file = FileConfig::load(cli.config.as_deref())?;
    std::fs::create_dir_all(&cli.out_dir).with_context(|| format!("creating {}", cli.out_dir.display()))?;
    match &cli.command {
        Command::SynthCorpus(a) => synth_corpus(cli, a),
        Command::Train(a) => train(cli, &file, a),
        Command::SweepAlpha(a) => sweep(cli, &file, a),
        Command::Eval(a) => eval(cli, &file, a),
        Command::DelayTable(a) => delay(cli, &file, a),
        Command::RocPlot(a) => roc_plot(cli, a),
    }
}

fn require(path: &Path, what: &str) -> Result<()> {
    if path.exists() {
        Ok(())
    } else {
        Err(usage(format!("{what} {} does not exist", path.display())))
    }
}

fn as_usage(e: VadError) -> anyhow::Error {
    match e {
        VadError::Config(_) => usage(e.to_string()),
        other => other.into(),
    }
}

fn load_manifest(path: &Path, what: &str) -> Result<Vec<Utterance>> {
    require(path, what)?;
    load_corpus(path).with_context(|| format!("loading {what} {}", path.display()))
}

fn write(out_dir: &Path, name: &str, text: &str) -> Result<PathBuf> {
    let path = out_dir.join(name);
    std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

fn synth_corpus(cli: &Cli, a: &SynthArgs) -> Result<()> {
    let seed = cli.seed();
    let (mut spec, default_name) = match a.split {
        SplitArg::Train => (SyntheticCorpusSpec::train(a.files, seed), "train"),
        SplitArg::Test => (SyntheticCorpusSpec::test(a.files, seed), "test"),
    };
    if a.fs != 8000 && a.fs != 16000 {
        return Err(usage(format!("--fs {} is not supported (8000 or 16000)", a.fs)));
    }
    spec.fs = a.fs;
    if let Some(v) = a.min_duration {
        spec.min_duration_s = v;
        spec.max_duration_s = spec.max_duration_s.max(v);
    }
    if let Some(v) = a.max_duration {
        spec.max_duration_s = v;
    }
    if let Some(kinds) = &a.noise_kinds {
        spec.noise_kinds = kinds
            .iter()
            .map(|k| k.parse::<NoiseKind>())
            .collect::<wavad_core::Result<_>>()
            .map_err(as_usage)?;
    }
    if let Some(snrs) = &a.snrs {
        spec.snrs = snrs
            .iter()
            .map(|s| s.parse::<Snr>())
            .collect::<wavad_core::Result<_>>()
            .map_err(|e| usage(e.to_string()))?;
    }
    if let Some(p) = a.speech_fraction {
        if !(0.0..=1.0).contains(&p) {
            return Err(usage("--speech-fraction must lie in [0, 1]"));
        }
        spec.structure.speech_fraction = p;
    }
    let name = a.name.as_deref().unwrap_or(default_name);
    write_echo(&cli.out_dir, "synth-corpus", seed, &spec)?;
    let corpus = generate_corpus(&spec).map_err(as_usage)?;
    let manifest = write_corpus(&cli.out_dir, name, &corpus)?;
    let frames: usize = corpus.iter().map(Utterance::frames).sum();
    let speech: usize = corpus.iter().map(Utterance::speech_frames).sum();
    let fraction = if frames == 0 { 0.0 } else { speech as f64 / frames as f64 };
    println!(
        "manifest={} files={} frames={frames} speech_fraction={fraction:.4}",
        manifest.display(),
        corpus.len()
    );
    Ok(())
}

#[derive(Serialize)]
struct TrainEcho<'a> {
    train: &'a Path,
    validation: Option<&'a Path>,
    resume: Option<&'a Path>,
    network: &'a NetworkConfig,
    schedule: &'a TrainSchedule,
    eval: EvalOptions,
}

fn train(cli: &Cli, file: &FileConfig, a: &TrainArgs) -> Result<()> {
    require(&a.train, "training manifest")?;
    if let Some(v) = &a.validation {
        require(v, "validation manifest")?;
    }
    if let Some(r) = &a.resume {
        require(r, "checkpoint")?;
    }
    let schedule = resolve_schedule(file, &a.model, cli.seed)?;
    let eval = file.eval.unwrap_or_default();
    let corpus = load_manifest(&a.train, "training manifest")?;
    let fs = corpus.first().map_or(8000, |u| u.fs);
    let mut trainer = match &a.resume {
        Some(path) => Trainer::resume(&Checkpoint::load(path)?, schedule.clone())?,
        None => {
            let cfg = resolve_network(file, &a.model, fs)?;
            Trainer::new(VadNetwork::new(cfg, cli.seed())?, schedule.clone(), cli.seed()).map_err(as_usage)?
        }
    };
    write_echo(
        &cli.out_dir,
        "train",
        cli.seed(),
        TrainEcho {
            train: &a.train,
            validation: a.validation.as_deref(),
            resume: a.resume.as_deref(),
            network: trainer.net.config(),
            schedule: &schedule,
            eval,
        },
    )?;
    let validation = a
        .validation
        .as_deref()
        .map(|p| load_manifest(p, "validation manifest"))
        .transpose()?;
    let options = RunOptions {
        validation,
        validation_options: eval,
        diagnostic_dir: Some(cli.out_dir.clone()),
        epoch_checkpoint: Some(cli.out_dir.join("checkpoint_epoch.json")),
    };
    let report = trainer.run(&corpus, &options)?;
    report.write(&cli.out_dir)?;
    let final_path = cli.out_dir.join("checkpoint.json");
    trainer.checkpoint().save(&final_path)?;
    let last = report.epochs.last();
    println!(
        "checkpoint={} epochs={} steps={} final_loss_vad={} validation_auc={}",
        final_path.display(),
        trainer.epochs_completed,
        trainer.steps_completed,
        last.map_or_else(|| "NA".into(), |e| e.mean_loss_vad.to_string()),
        last.and_then(|e| e.validation_auc).map_or_else(|| "NA".into(), |v| v.to_string())
    );
    Ok(())
}

#[derive(Serialize)]
struct SweepEcho<'a> {
    train: &'a Path,
    validation: &'a Path,
    grid: &'a [f64],
    network: &'a NetworkConfig,
    schedule: &'a TrainSchedule,
    eval: EvalOptions,
}

fn sweep(cli: &Cli, file: &FileConfig, a: &SweepArgs) -> Result<()> {
    require(&a.train, "training manifest")?;
    require(&a.validation, "validation manifest")?;
    if a.grid.iter().any(|x| !(*x >= 0.0 && x.is_finite())) {
        return Err(usage("--grid values must be finite and non-negative"));
    }
    let schedule = resolve_schedule(file, &a.model, cli.seed)?;
    let eval = resolve_eval(file, &a.eval)?;
    let corpus = load_manifest(&a.train, "training manifest")?;
    let validation = load_manifest(&a.validation, "validation manifest")?;
    let fs = corpus.first().map_or(8000, |u| u.fs);
    let cfg = resolve_network(file, &a.model, fs)?;
    write_echo(
        &cli.out_dir,
        "sweep-alpha",
        cli.seed(),
        SweepEcho {
            train: &a.train,
            validation: &a.validation,
            grid: &a.grid,
            network: &cfg,
            schedule: &schedule,
            eval,
        },
    )?;
    let initial = VadNetwork::new(cfg, cli.seed())?;
    let results = alpha_sweep(&initial, cli.seed(), &corpus, &validation, &schedule, &a.grid, &eval).map_err(as_usage)?;
    for r in &results {
        write(&cli.out_dir, &format!("alpha_{}_report.csv", r.alpha), &r.report.to_csv())?;
    }
    let csv = sweep_csv(&a.set_name, &results);
    let path = write(&cli.out_dir, "alpha_sweep.csv", &csv)?;
    print!("{csv}");
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn check_rates(net: &VadNetwork, corpus: &[Utterance]) -> Result<()> {
    match corpus.iter().find(|u| u.fs != net.config().fs) {
        Some(u) => Err(usage(format!(
            "corpus is sampled at {} Hz but the checkpoint expects {} Hz",
            u.fs,
            net.config().fs
        ))),
        None => Ok(()),
    }
}

#[derive(Serialize)]
struct EvalEcho<'a> {
    checkpoint: &'a Path,
    test: &'a Path,
    eval: EvalOptions,
}

fn eval(cli: &Cli, file: &FileConfig, a: &EvalArgs) -> Result<()> {
    require(&a.checkpoint, "checkpoint")?;
    require(&a.test, "test manifest")?;
    let options = resolve_eval(file, &a.eval)?;
    write_echo(
        &cli.out_dir,
        "eval",
        cli.seed(),
        EvalEcho {
            checkpoint: &a.checkpoint,
            test: &a.test,
            eval: options,
        },
    )?;
    let net = load_network(&a.checkpoint)?;
    let corpus = load_manifest(&a.test, "test manifest")?;
    check_rates(&net, &corpus)?;
    let report = condition_report(&net, &corpus, &options)?;
    let csv = report.to_csv();
    write(&cli.out_dir, "condition_report.csv", &csv)?;
    write(&cli.out_dir, "condition_cells.csv", &report.cells_csv())?;
    write(
        &cli.out_dir,
        "condition_report.json",
        &serde_json::to_string_pretty(&report).context("serializing report")?,
    )?;
    print!("{csv}");
    Ok(())
}

fn parse_eb(text: &str) -> Result<[usize; 4]> {
    let parts: Vec<usize> = text
        .split(',')
        .map(|p| p.trim().parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| usage(format!("bad encoder kernels '{text}'")))?;
    <[usize; 4]>::try_from(parts).map_err(|_| usage(format!("expected four encoder kernels, got '{text}'")))
}

#[derive(Serialize)]
struct DelayEcho<'a> {
    fs: u32,
    mode: DelayMode,
    eb_kernels: [usize; 4],
    grid: &'a [[usize; 3]],
    checkpoint_dir: Option<&'a Path>,
    test: Option<&'a Path>,
}

fn delay(cli: &Cli, file: &FileConfig, a: &DelayArgs) -> Result<()> {
    let mode = match a.mode {
        ModeArg::Strict => DelayMode::Strict,
        ModeArg::Published => DelayMode::Published,
    };
    let eb = match &a.eb_kernels {
        Some(text) => parse_eb(text)?,
        None => DEFAULT_EB_KERNELS,
    };
    let grid: Vec<[usize; 3]> = if a.db.is_empty() {
        published_grid()
    } else {
        a.db.iter()
            .map(|t| parse_kernels(t).map_err(as_usage))
            .collect::<Result<_>>()?
    };
    if let Some(dir) = &a.checkpoint_dir {
        require(dir, "checkpoint directory")?;
    }
    if let Some(t) = &a.test {
        require(t, "test manifest")?;
    }
    write_echo(
        &cli.out_dir,
        "delay-table",
        cli.seed(),
        DelayEcho {
            fs: a.fs,
            mode,
            eb_kernels: eb,
            grid: &grid,
            checkpoint_dir: a.checkpoint_dir.as_deref(),
            test: a.test.as_deref(),
        },
    )?;
    let rows = delay_table(a.fs, eb, &grid, mode).map_err(as_usage)?;
    let mut buf = Vec::new();
    write_delay_csv(&rows, &mut buf)?;
    let csv = String::from_utf8(buf).expect("ascii csv");
    write(&cli.out_dir, "delay_table.csv", &csv)?;
    print!("{csv}");

    if a.db.is_empty() && a.fs == 8000 && eb == DEFAULT_EB_KERNELS {
        let mut check = String::from("db1,db2,db3,delay_ms,printed_ms,status\n");
        for (row, published) in rows.iter().zip(PUBLISHED_DELAYS.iter()) {
            let status = if row.delay_ms == f64::from(published.printed_ms) { "match" } else { "flagged" };
            let k = row.db_kernels;
            writeln!(check, "{},{},{},{},{},{status}", k[0], k[1], k[2], row.delay_ms, published.printed_ms).unwrap();
        }
        write(&cli.out_dir, "delay_check.csv", &check)?;
    }

    if let (Some(dir), Some(test)) = (&a.checkpoint_dir, &a.test) {
        let mut base = file.network.clone().unwrap_or_else(|| NetworkConfig::standard(a.fs));
        base.fs = a.fs;
        base.eb_kernels = eb;
        let entries: Vec<DelayCurveEntry> = grid
            .iter()
            .map(|k| DelayCurveEntry {
                db_kernels: *k,
                checkpoint: Some(dir.join(format!("db_{}_{}_{}.json", k[0], k[1], k[2]))),
            })
            .collect();
        let corpus = load_manifest(test, "test manifest")?;
        let options = resolve_eval(file, &a.eval)?;
        let curve = delay_performance_curve(&base, &entries, &corpus, mode, &options).map_err(as_usage)?;
        write(&cli.out_dir, "delay_curve.csv", &delay_curve_csv(&curve))?;
        let points: Vec<(f64, f64)> = curve.iter().filter_map(|r| r.mean_auc.map(|v| (r.delay_ms, v))).collect();
        let max_delay = curve.iter().map(|r| r.delay_ms).fold(0.0, f64::max);
        let svg = line_plot(
            "Mean AUC versus algorithmic delay",
            "delay (ms)",
            "mean AUC",
            (0.0, max_delay.max(1.0)),
            (0.5, 1.0),
            &[Series {
                label: "mean AUC",
                points,
            }],
        );
        write(&cli.out_dir, "delay_curve.svg", &svg)?;
    }
    Ok(())
}

fn roc_plot(cli: &Cli, a: &RocArgs) -> Result<()> {
    require(&a.checkpoint, "checkpoint")?;
    require(&a.test, "test manifest")?;
    let per_forward = a.eval_files_per_forward.unwrap_or(EvalOptions::default().files_per_forward);
    if per_forward == 0 {
        return Err(usage("--eval-files-per-forward must be positive"));
    }
    write_echo(&cli.out_dir, "roc-plot", cli.seed(), (&a.checkpoint, &a.test, per_forward))?;
    let net = load_network(&a.checkpoint)?;
    let corpus = load_manifest(&a.test, "test manifest")?;
    check_rates(&net, &corpus)?;
    let segments = score_corpus(&net, &corpus, per_forward)?;
    let mut by_snr: BTreeMap<Snr, (Vec<f64>, Vec<u8>)> = BTreeMap::new();
    for s in &segments {
        let entry = by_snr.entry(s.condition.snr).or_default();
        entry.0.extend_from_slice(&s.scores);
        entry.1.extend_from_slice(&s.labels);
    }
    let mut labels = Vec::new();
    let mut curves = Vec::new();
    let mut table = String::from("snr,auc,frames\n");
    for (snr, (scores, truth)) in &by_snr {
        match roc(scores, truth) {
            Ok(curve) => {
                writeln!(table, "{snr},{},{}", curve.auc, scores.len()).unwrap();
                labels.push(format!("{snr} (AUC {:.3})", curve.auc));
                curves.push(curve);
            }
            Err(VadError::UndefinedAuc(_)) => writeln!(table, "{snr},NA,{}", scores.len()).unwrap(),
            Err(e) => return Err(e.into()),
        }
    }
    let series: Vec<Series> = labels
        .iter()
        .zip(&curves)
        .map(|(label, c)| Series {
            label,
            points: c.fpr.iter().copied().zip(c.tpr.iter().copied()).collect(),
        })
        .collect();
    let svg = line_plot("ROC per SNR", "false positive rate", "true positive rate", (0.0, 1.0), (0.0, 1.0), &series);
    write(&cli.out_dir, "roc.svg", &svg)?;
    write(&cli.out_dir, "roc_auc.csv", &table)?;
    print!("{table}");
    Ok(())
}
