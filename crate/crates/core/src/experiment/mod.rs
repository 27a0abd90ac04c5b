//! Experiment matrix, CSV output, run metadata, the trend comparison and
//! the overhead report of a recorded run.

mod analyze;
mod compare;
mod config;
mod csv;
mod matrix;
mod meta;

pub use analyze::{overhead_report, EfficiencyOutcome, EfficiencyQuery, OverheadReport, ReportLine, TcReading};
pub use compare::{
    compare_profiles, Sign, SignRow, TrendReport, TrendResult, TrendStatus, DELAY_MIN_RATE, HIGH_RATE, ML_MIN_RATE,
    REQUIRED_TRENDS,
};
pub use config::ExperimentConfig;
pub use csv::{emit_csv, format_sig6, parse_csv, render_csv, CellSummary, SeedPerf, NA};
pub use matrix::{prepare_run, resolve_workers, run_matrix, run_single, ResultRow, RunSetup, Scenario, SeedRun, WORKERS_ENV};
pub use meta::RunMeta;
