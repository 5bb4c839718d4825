//! Config-driven experiment grids: train every (dataset, variant) cell,
//! score it, and write report, plot-data and checkpoint files.

mod config;
mod plots;
mod report;
mod run;

use thiserror::Error;

use crate::gan::GanError;

pub use config::{parse_entries, DatasetConfig, DatasetSource, ExperimentConfig, MetricSettings, ModelSettings};
pub use plots::{kde_series, qq_series, sanitize, write_plot, PlotSeries};
pub use report::{parse_report, render_csv, render_text, write_report, MetricReport, Provenance, ReportRow, RowStatus};
pub use run::{run_experiment, write_outputs, ExperimentOutput, TrainedModel};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },
    #[error(transparent)]
    Gan(#[from] GanError),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("report: {0}")]
    Report(String),
}

impl BenchError {
    pub(crate) fn io(path: &std::path::Path, e: impl std::fmt::Display) -> Self {
        Self::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        }
    }
}
