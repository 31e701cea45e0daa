use std::fmt::Write as _;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::checkpoint::load_network;
use crate::corpus::Utterance;
use crate::delay::DelayMode;
use crate::error::{Result, VadError};
use crate::evaluator::report::{condition_report, EvalOptions};
use crate::model::{NetworkConfig, VadNetwork};

/// Delay in milliseconds read off a built network's layer geometry.
///
/// The receptive field of one decoder frame is walked back through every
/// layer to the waveform; the future half of it, less the current hop, is
/// the delay. [`DelayMode::Published`] additionally charges one hop per
/// configured decoder layer.
pub fn network_delay_ms(net: &VadNetwork, mode: DelayMode) -> f64 {
    let mut field = 1usize;
    for layer in net.decoder().iter().rev() {
        field += layer.kernel_size() - 1;
    }
    let fb = net.framing();
    field = (field - 1) * fb.stride() + fb.kernel_size();
    for layer in net.encoder().iter().rev() {
        field += layer.kernel_size() - 1;
    }
    let hop = fb.stride();
    let mut context = field - hop - 1;
    if mode == DelayMode::Published {
        context += hop * net.config().db_kernels.iter().filter(|&&k| k > 0).count();
    }
    context as f64 * 1000.0 / (2.0 * f64::from(net.config().fs))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DelayCurveEntry {
    pub db_kernels: [usize; 3],
    pub checkpoint: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DelayCurveRow {
    pub db_kernels: [usize; 3],
    pub delay_ms: f64,
    /// `None` when the checkpoint is missing or unusable.
    pub mean_auc: Option<f64>,
    pub note: String,
}

/// Pairs each decoder configuration's delay with its mean AUC on `corpus`.
///
/// Rows whose checkpoint is absent, unreadable or built for different
/// decoder kernels are kept with a missing AUC and a note.
pub fn delay_performance_curve(
    base: &NetworkConfig,
    entries: &[DelayCurveEntry],
    corpus: &[Utterance],
    mode: DelayMode,
    options: &EvalOptions,
) -> Result<Vec<DelayCurveRow>> {
    entries
        .iter()
        .map(|entry| {
            let mut config = base.clone();
            config.db_kernels = entry.db_kernels;
            let geometry = VadNetwork::zeroed(config)?;
            let delay_ms = network_delay_ms(&geometry, mode);
            let (mean_auc, note) = match &entry.checkpoint {
                None => (None, "missing checkpoint".to_string()),
                Some(path) if !path.exists() => (None, format!("missing checkpoint {}", path.display())),
                Some(path) => match load_network(path) {
                    Err(e) => (None, e.to_string()),
                    Ok(net) if net.config().db_kernels != entry.db_kernels => (
                        None,
                        format!("checkpoint has decoder kernels {:?}", net.config().db_kernels),
                    ),
                    Ok(net) => (condition_report(&net, corpus, options)?.mean_auc(), String::new()),
                },
            };
            Ok(DelayCurveRow {
                db_kernels: entry.db_kernels,
                delay_ms,
                mean_auc,
                note,
            })
        })
        .collect()
}

/// `db1,db2,db3,delay_ms,mean_auc,note`; a missing AUC is written as `NA`.
pub fn delay_curve_csv(rows: &[DelayCurveRow]) -> String {
    let mut out = String::from("db1,db2,db3,delay_ms,mean_auc,note\n");
    for r in rows {
        let auc = r.mean_auc.map_or_else(|| "NA".into(), |a| a.to_string());
        let note = r.note.replace([',', '\n'], ";");
        writeln!(
            out,
            "{},{},{},{},{auc},{note}",
            r.db_kernels[0], r.db_kernels[1], r.db_kernels[2], r.delay_ms
        )
        .unwrap();
    }
    out
}

/// Parses `k1,k2,k3` decoder kernels.
pub fn parse_kernels(text: &str) -> Result<[usize; 3]> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(VadError::Config(format!("expected three kernel sizes, got '{text}'")));
    }
    let mut out = [0; 3];
    for (slot, p) in out.iter_mut().zip(parts) {
        *slot = p
            .parse()
            .map_err(|_| VadError::Config(format!("bad kernel size '{p}'")))?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::delay::{delay_table, published_grid};
    use crate::model::DEFAULT_EB_KERNELS;

    #[test]
    fn geometry_matches_closed_form() {
        for mode in [DelayMode::Strict, DelayMode::Published] {
            let table = delay_table(8000, DEFAULT_EB_KERNELS, &published_grid(), mode).unwrap();
            for row in table {
                let mut cfg = NetworkConfig::standard(8000);
                cfg.db_kernels = row.db_kernels;
                let net = VadNetwork::zeroed(cfg).unwrap();
                assert_eq!(network_delay_ms(&net, mode), row.delay_ms, "{:?}", row.db_kernels);
            }
        }
    }

    #[test]
    fn missing_checkpoints_keep_their_rows() {
        let entries: Vec<DelayCurveEntry> = published_grid()
            .into_iter()
            .map(|db| DelayCurveEntry {
                db_kernels: db,
                checkpoint: None,
            })
            .collect();
        let base = NetworkConfig::standard(8000);
        let rows = delay_performance_curve(&base, &entries, &[], DelayMode::Published, &EvalOptions::default()).unwrap();
        assert_eq!(rows.len(), 13);
        assert!(rows.iter().all(|r| r.mean_auc.is_none()));
        let csv = delay_curve_csv(&rows);
        assert_eq!(csv.lines().count(), 14);
        assert!(csv.lines().nth(1).unwrap().starts_with("55,15,5,398,NA"));
    }

    #[test]
    fn kernel_parsing() {
        assert_eq!(parse_kernels("7, 5,5").unwrap(), [7, 5, 5]);
        assert!(parse_kernels("7,5").is_err());
        assert!(parse_kernels("a,b,c").is_err());
    }
}
