//! Result rows, their CSV form, and the analytic-vs-simulation report.

use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use super::HarnessError;
use crate::analytic::{mgf_derivative_check, DerivativeCheck, FlowSet, ServiceSpec};

pub const CSV_HEADER: [&str; 8] =
    ["sweep_value", "analytic_aoi", "analytic_upper", "sim_aoi", "sim_ci", "sim_peak_aoi", "rel_error", "status"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowStatus {
    Ok,
    /// A chain node's load reaches its service rate.
    Unstable,
    Overloaded,
    /// Some replication delivered too few packets.
    HorizonTooShort,
    Error,
}

impl RowStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            RowStatus::Ok => "ok",
            RowStatus::Unstable => "unstable",
            RowStatus::Overloaded => "overloaded",
            RowStatus::HorizonTooShort => "horizon_too_short",
            RowStatus::Error => "error",
        }
    }
}

impl fmt::Display for RowStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RowStatus {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [RowStatus::Ok, RowStatus::Unstable, RowStatus::Overloaded, RowStatus::HorizonTooShort, RowStatus::Error]
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| HarnessError::Results(format!("unknown status {s:?}")))
    }
}

/// One sweep point. Simulated columns are present iff every replication
/// delivered enough packets.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub sweep_value: f64,
    pub analytic_aoi: Option<f64>,
    /// Only the chain model has an upper bound.
    pub analytic_upper: Option<f64>,
    pub sim_aoi: Option<f64>,
    pub sim_ci: Option<f64>,
    pub sim_peak_aoi: Option<f64>,
    /// `(analytic - sim) / sim`.
    pub rel_error: Option<f64>,
    pub status: RowStatus,
}

impl ResultRow {
    pub fn signed_rel_error(analytic: Option<f64>, sim: Option<f64>) -> Option<f64> {
        match (analytic, sim) {
            (Some(a), Some(s)) if s != 0.0 => Some((a - s) / s),
            _ => None,
        }
    }
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_rows<W: Write>(rows: &[ResultRow], out: W) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record([
            r.sweep_value.to_string(),
            cell(r.analytic_aoi),
            cell(r.analytic_upper),
            cell(r.sim_aoi),
            cell(r.sim_ci),
            cell(r.sim_peak_aoi),
            cell(r.rel_error),
            r.status.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes a header row and one line per row; an empty slice gives a
/// header-only file.
pub fn emit_csv(rows: &[ResultRow], path: &Path) -> Result<(), HarnessError> {
    let file = std::fs::File::create(path)?;
    write_rows(rows, std::io::BufWriter::new(file))
}

pub fn read_rows<R: Read>(input: R) -> Result<Vec<ResultRow>, HarnessError> {
    let mut rd = csv::Reader::from_reader(input);
    let header = rd.headers()?.clone();
    if header.iter().ne(CSV_HEADER) {
        return Err(HarnessError::Results(format!("expected header {}, got {}", CSV_HEADER.join(","), header.iter().collect::<Vec<_>>().join(","))));
    }
    let mut rows = Vec::new();
    for (n, rec) in rd.records().enumerate() {
        let rec = rec?;
        let line = n + 2;
        let opt = |i: usize| -> Result<Option<f64>, HarnessError> {
            match rec.get(i).unwrap_or("") {
                "" => Ok(None),
                s => s.parse().map(Some).map_err(|e| HarnessError::Results(format!("line {line}, {}: {e}", CSV_HEADER[i]))),
            }
        };
        rows.push(ResultRow {
            sweep_value: opt(0)?.ok_or_else(|| HarnessError::Results(format!("line {line}: missing sweep_value")))?,
            analytic_aoi: opt(1)?,
            analytic_upper: opt(2)?,
            sim_aoi: opt(3)?,
            sim_ci: opt(4)?,
            sim_peak_aoi: opt(5)?,
            rel_error: opt(6)?,
            status: rec.get(7).unwrap_or("").parse()?,
        });
    }
    Ok(rows)
}

pub fn parse_csv(path: &Path) -> Result<Vec<ResultRow>, HarnessError> {
    read_rows(std::fs::File::open(path)?)
}

/// Flow set used for the MGF cross-check when a report has no multistream
/// scenario to draw one from.
pub fn reference_flows() -> FlowSet {
    FlowSet { rates: vec![1.0, 2.0], p_success: 0.5, service: ServiceSpec::exponential(2.0).expect("positive rate") }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RowCheck {
    pub sweep_value: f64,
    pub analytic: Option<f64>,
    pub sim: Option<f64>,
    pub rel_error: Option<f64>,
    /// `None` when either column is missing.
    pub pass: Option<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscrepancyReport {
    pub tolerance: f64,
    pub rows: Vec<RowCheck>,
    /// Largest `|rel_error|` over the comparable rows; 0 if there are none.
    pub max_abs_error: f64,
    pub derivative_check: DerivativeCheck,
    pub derivative_flows: FlowSet,
}

impl DiscrepancyReport {
    pub fn passed(&self) -> usize {
        self.rows.iter().filter(|r| r.pass == Some(true)).count()
    }

    pub fn flagged(&self) -> usize {
        self.rows.iter().filter(|r| r.pass == Some(false)).count()
    }
}

/// Relative analytic-vs-simulated error per row, checked against `tolerance`,
/// together with the MGF derivative cross-check on `flows` (flow 0).
pub fn compare_analytic_vs_des(rows: &[ResultRow], tolerance: f64, flows: &FlowSet) -> Result<DiscrepancyReport, HarnessError> {
    let checks: Vec<RowCheck> = rows
        .iter()
        .map(|r| {
            let rel_error = ResultRow::signed_rel_error(r.analytic_aoi, r.sim_aoi);
            RowCheck {
                sweep_value: r.sweep_value,
                analytic: r.analytic_aoi,
                sim: r.sim_aoi,
                rel_error,
                pass: rel_error.map(|e| e.abs() <= tolerance),
            }
        })
        .collect();
    let max_abs_error = checks.iter().filter_map(|c| c.rel_error).map(f64::abs).fold(0.0, f64::max);
    let derivative_check = mgf_derivative_check(flows, 0).map_err(|e| HarnessError::Validation {
        field: "flows".into(),
        constraint: format!("derivative cross-check: {e}"),
    })?;
    Ok(DiscrepancyReport { tolerance, rows: checks, max_abs_error, derivative_check, derivative_flows: flows.clone() })
}

impl fmt::Display for DiscrepancyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let opt = |v: Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_else(|| "-".into());
        writeln!(f, "analytic vs simulated AoI (tolerance {})", self.tolerance)?;
        writeln!(f, "{:>14} {:>14} {:>14} {:>12}  mark", "sweep_value", "analytic", "simulated", "rel_error")?;
        for r in &self.rows {
            let mark = match r.pass {
                Some(true) => "pass",
                Some(false) => "FLAG",
                None => "n/a",
            };
            writeln!(f, "{:>14} {:>14} {:>14} {:>12}  {mark}", r.sweep_value, opt(r.analytic), opt(r.sim), opt(r.rel_error))?;
        }
        writeln!(f, "rows: {}  passed: {}  flagged: {}  max |rel_error|: {}", self.rows.len(), self.passed(), self.flagged(), self.max_abs_error)?;
        writeln!(f)?;
        let fl = &self.derivative_flows;
        writeln!(f, "flows: rates = {:?}, mu = {}, p = {}", fl.rates, fl.service.rate, fl.p_success)?;
        writeln!(f, "{}", self.derivative_check)
    }
}
