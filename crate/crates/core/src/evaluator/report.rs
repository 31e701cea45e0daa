use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::corpus::{concatenate, test_snr_grid, Condition, Snr, Utterance};
use crate::error::{Result, VadError};
use crate::evaluator::roc::auc;
use crate::model::{frame_label_alignment, speech_scores, VadNetwork};

/// How the per-SNR summary row combines noise types.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseAggregation {
    /// Mean of the per-noise-type AUCs.
    #[default]
    Average,
    /// One AUC over the frames of every noise type.
    Pool,
}

/// How one cell's AUC is formed from its scored segments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellPooling {
    /// One AUC over all frames of the cell.
    #[default]
    Frames,
    /// Mean of per-file AUCs; files with a single class are skipped.
    PerFile,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalOptions {
    /// Files of one cell concatenated into each inference pass.
    pub files_per_forward: usize,
    pub aggregation: NoiseAggregation,
    pub pooling: CellPooling,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            files_per_forward: 10,
            aggregation: NoiseAggregation::Average,
            pooling: CellPooling::Frames,
        }
    }
}

/// Frame scores and aligned labels of one inference pass.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredSegment {
    pub condition: Condition,
    pub scores: Vec<f64>,
    pub labels: Vec<u8>,
}

/// Runs inference cell by cell, concatenating up to `files_per_forward`
/// files (in corpus order) per pass.
pub fn score_corpus(net: &VadNetwork, corpus: &[Utterance], files_per_forward: usize) -> Result<Vec<ScoredSegment>> {
    if files_per_forward == 0 {
        return Err(VadError::Config("files_per_forward must be positive".into()));
    }
    let mut by_cell: BTreeMap<Condition, Vec<&Utterance>> = BTreeMap::new();
    for u in corpus {
        by_cell.entry(u.condition()).or_default().push(u);
    }
    let mut segments = Vec::new();
    for (condition, files) in by_cell {
        for chunk in files.chunks(files_per_forward) {
            let joined = concatenate(chunk.iter().copied())?;
            let out = net.infer(&joined.samples)?;
            let scores = speech_scores(&out)?;
            let labels = frame_label_alignment(scores.len(), &joined.vad_labels)?;
            segments.push(ScoredSegment {
                condition,
                scores,
                labels,
            });
        }
    }
    Ok(segments)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub noise_type: usize,
    pub snr: Snr,
    pub auc: Option<f64>,
    pub frames: usize,
    pub segments: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub label: String,
    /// One entry per column; `None` marks a missing cell.
    pub values: Vec<Option<f64>>,
    /// Mean of the present column values.
    pub mean: Option<f64>,
}

/// AUC per noise type and SNR, laid out as rows by SNR columns with a Mean column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub columns: Vec<Snr>,
    pub cells: Vec<CellResult>,
    /// One row per noise type followed by the `average` row.
    pub rows: Vec<ReportRow>,
    pub aggregation: NoiseAggregation,
    pub pooling: CellPooling,
}

fn undefined_to_none(r: Result<f64>) -> Result<Option<f64>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(VadError::UndefinedAuc(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

fn mean_present(values: &[Option<f64>]) -> Option<f64> {
    let present: Vec<f64> = values.iter().flatten().copied().collect();
    if present.is_empty() {
        None
    } else {
        Some(present.iter().sum::<f64>() / present.len() as f64)
    }
}

fn pooled_auc(segments: &[&ScoredSegment], pooling: CellPooling) -> Result<Option<f64>> {
    match pooling {
        CellPooling::Frames => {
            let scores: Vec<f64> = segments.iter().flat_map(|s| s.scores.iter().copied()).collect();
            let labels: Vec<u8> = segments.iter().flat_map(|s| s.labels.iter().copied()).collect();
            undefined_to_none(auc(&scores, &labels))
        }
        CellPooling::PerFile => {
            let per: Vec<Option<f64>> = segments
                .iter()
                .map(|s| undefined_to_none(auc(&s.scores, &s.labels)))
                .collect::<Result<_>>()?;
            Ok(mean_present(&per))
        }
    }
}

/// Builds the report from scored segments.
pub fn report_from_segments(
    segments: &[ScoredSegment],
    aggregation: NoiseAggregation,
    pooling: CellPooling,
) -> Result<ConditionReport> {
    let mut by_cell: BTreeMap<Condition, Vec<&ScoredSegment>> = BTreeMap::new();
    for s in segments {
        by_cell.entry(s.condition).or_default().push(s);
    }
    let mut cell_auc: BTreeMap<Condition, Option<f64>> = BTreeMap::new();
    let mut cells = Vec::new();
    for (cond, segs) in &by_cell {
        let value = pooled_auc(segs, pooling)?;
        cell_auc.insert(*cond, value);
        cells.push(CellResult {
            noise_type: cond.noise_type,
            snr: cond.snr,
            auc: value,
            frames: segs.iter().map(|s| s.scores.len()).sum(),
            segments: segs.len(),
        });
    }

    let columns: Vec<Snr> = test_snr_grid()
        .into_iter()
        .chain(by_cell.keys().map(|c| c.snr))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let noise_types: Vec<usize> = by_cell
        .keys()
        .map(|c| c.noise_type)
        .filter(|&k| k > 0)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();

    // The cell that fills (noise type, column); clean audio may be shared.
    let source = |k: usize, snr: Snr| -> Option<Condition> {
        let own = Condition { noise_type: k, snr };
        if by_cell.contains_key(&own) {
            return Some(own);
        }
        let shared = Condition { noise_type: 0, snr };
        (snr == Snr::Clean && by_cell.contains_key(&shared)).then_some(shared)
    };

    let mut rows = Vec::new();
    for &k in &noise_types {
        let values: Vec<Option<f64>> = columns.iter().map(|&snr| source(k, snr).and_then(|c| cell_auc[&c])).collect();
        rows.push(ReportRow {
            label: format!("noise_type_{k}"),
            mean: mean_present(&values),
            values,
        });
    }

    let mut average = Vec::with_capacity(columns.len());
    for &snr in &columns {
        let mut contributing: BTreeSet<Condition> = noise_types.iter().filter_map(|&k| source(k, snr)).collect();
        if contributing.is_empty() {
            contributing.extend(source(0, snr));
        }
        let value = match aggregation {
            NoiseAggregation::Average => {
                let v: Vec<Option<f64>> = contributing.iter().map(|c| cell_auc[c]).collect();
                mean_present(&v)
            }
            NoiseAggregation::Pool => {
                let segs: Vec<&ScoredSegment> = contributing.iter().flat_map(|c| by_cell[c].iter().copied()).collect();
                if segs.is_empty() {
                    None
                } else {
                    pooled_auc(&segs, pooling)?
                }
            }
        };
        average.push(value);
    }
    rows.push(ReportRow {
        label: "average".into(),
        mean: mean_present(&average),
        values: average,
    });

    Ok(ConditionReport {
        columns,
        cells,
        rows,
        aggregation,
        pooling,
    })
}

/// Scores `corpus` with `net` and builds the report.
pub fn condition_report(net: &VadNetwork, corpus: &[Utterance], options: &EvalOptions) -> Result<ConditionReport> {
    let per_forward = match options.pooling {
        CellPooling::Frames => options.files_per_forward,
        CellPooling::PerFile => 1,
    };
    let segments = score_corpus(net, corpus, per_forward)?;
    report_from_segments(&segments, options.aggregation, options.pooling)
}

fn fmt_value(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |x| x.to_string())
}

impl ConditionReport {
    pub fn average(&self) -> &ReportRow {
        self.rows.last().expect("report always has an average row")
    }

    /// Mean of the average row.
    pub fn mean_auc(&self) -> Option<f64> {
        self.average().mean
    }

    pub fn column(&self, snr: Snr) -> Option<usize> {
        self.columns.iter().position(|&c| c == snr)
    }

    /// Average-row AUC at one SNR.
    pub fn at(&self, snr: Snr) -> Option<f64> {
        self.column(snr).and_then(|i| self.average().values[i])
    }

    pub fn cell(&self, condition: Condition) -> Option<&CellResult> {
        self.cells
            .iter()
            .find(|c| c.noise_type == condition.noise_type && c.snr == condition.snr)
    }

    /// `condition,clean,20,...,-5,mean`; missing cells are written as `NA`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("condition");
        for c in &self.columns {
            write!(out, ",{c}").unwrap();
        }
        out.push_str(",mean\n");
        for row in &self.rows {
            out.push_str(&row.label);
            for v in &row.values {
                write!(out, ",{}", fmt_value(*v)).unwrap();
            }
            writeln!(out, ",{}", fmt_value(row.mean)).unwrap();
        }
        out
    }

    /// `noise_type,snr,auc,frames,segments`.
    pub fn cells_csv(&self) -> String {
        let mut out = String::from("noise_type,snr,auc,frames,segments\n");
        for c in &self.cells {
            writeln!(out, "{},{},{},{},{}", c.noise_type, c.snr, fmt_value(c.auc), c.frames, c.segments).unwrap();
        }
        out
    }
}
