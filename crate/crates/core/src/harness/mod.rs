//! Scenario files, parameter sweeps over the analytic and simulated models,
//! plot-ready CSV and discrepancy reports.

mod report;
mod scenario;
mod sweep;

use thiserror::Error;

pub use report::{
    compare_analytic_vs_des, emit_csv, parse_csv, read_rows, reference_flows, write_rows, DiscrepancyReport, ResultRow,
    RowCheck, RowStatus, CSV_HEADER,
};
pub use scenario::{
    load_scenario, parse_scenario, AnalyticModel, ChainLayout, ChainTemplate, ChannelSettings, FlowTemplate, Param,
    RateLayout, ScenarioConfig, SuccessProb, Sweep, SystemKind, DEFAULT_TOLERANCE,
};
pub use sweep::{estimate_psj, run_scenario, run_sweep, sweep_points, FamilyResult, PsjEstimate, RunOutput, SweepPoint};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{path}{}: {message}", line.map(|l| format!(":{l}")).unwrap_or_default())]
    Parse { path: String, line: Option<usize>, message: String },
    #[error("invalid `{field}`: {constraint}")]
    Validation { field: String, constraint: String },
    #[error("success-probability estimate failed: {0}")]
    Estimation(String),
    #[error("results file: {0}")]
    Results(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl HarnessError {
    /// Prefixes a validation field with the section it came from.
    fn within(self, section: &str) -> Self {
        match self {
            HarnessError::Validation { field, constraint } => {
                HarnessError::Validation { field, constraint: format!("{constraint} (at a {section} value)") }
            }
            other => other,
        }
    }
}
