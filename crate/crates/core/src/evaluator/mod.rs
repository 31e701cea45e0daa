//! ROC/AUC scoring, per-condition reports, delay/performance curves and plots.

pub mod delay_curve;
pub mod plot;
pub mod report;
pub mod roc;

pub use delay_curve::{delay_curve_csv, delay_performance_curve, network_delay_ms, parse_kernels, DelayCurveEntry, DelayCurveRow};
pub use plot::{line_plot, Series};
pub use report::{
    condition_report, report_from_segments, score_corpus, CellPooling, CellResult, ConditionReport, EvalOptions,
    NoiseAggregation, ReportRow, ScoredSegment,
};
pub use roc::{auc, auc_pairwise_oracle, roc, RocCurve};
