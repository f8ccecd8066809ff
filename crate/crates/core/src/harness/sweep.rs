//! Sweep execution.
//!
//! Replication `r` at sweep index `s` is seeded from
//! `derive(derive(root, SweepPoint, s), Replication, r)`, independent of the
//! family value, so family curves share random numbers point by point.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::report::{compare_analytic_vs_des, emit_csv, reference_flows, DiscrepancyReport, ResultRow, RowStatus};
use super::scenario::{AnalyticModel, ScenarioConfig, SuccessProb, SystemKind};
use super::HarnessError;
use crate::analytic::{chain_aoi_approx, chain_aoi_upper, mg11_average_aoi, mm11_average_aoi, AnalyticError, FlowSet};
use crate::channel::{estimate_success_probability, Activity};
use crate::des::{simulate_multistream, simulate_tandem, DesError};
use crate::seed::{self, Stream};
use crate::spatial::{associate_nearest, sample_ground_pattern, sample_uavs};

/// Spatially averaged success probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsjEstimate {
    pub p_hat: f64,
    /// 95% half-width across source nodes.
    pub ci_halfwidth: f64,
    pub sources: usize,
    pub ground_nodes: usize,
    pub uavs: usize,
}

/// Samples one ground and UAV realization, then averages the Monte Carlo
/// success probability of up to `channel.sources` evenly spaced source nodes
/// under scheduled interference.
pub fn estimate_psj(cfg: &ScenarioConfig, seed: u64) -> Result<PsjEstimate, HarnessError> {
    let err = |e: &dyn std::fmt::Display| HarnessError::Estimation(e.to_string());
    let ground = sample_ground_pattern(&cfg.spatial, &cfg.window, seed);
    let uavs = sample_uavs(&cfg.spatial, &cfg.window, seed);
    let assoc = associate_nearest(&ground, &uavs).map_err(|e| err(&e))?;
    let n = ground.len();
    if n == 0 {
        return Err(HarnessError::Estimation("no ground nodes in the window".into()));
    }
    let count = cfg.channel.sources.min(n);
    let estimates = (0..count)
        .map(|k| {
            let source = k * n / count;
            estimate_success_probability(
                &ground,
                &uavs,
                &assoc,
                source,
                &cfg.channel.config,
                Activity::Scheduled,
                cfg.channel.samples,
                seed::derive(seed, Stream::Channel, k as u64),
            )
            .map(|e| e.p_hat)
            .map_err(|e| err(&e))
        })
        .collect::<Result<Vec<f64>, _>>()?;
    let (mean, half) = mean_ci(&estimates);
    Ok(PsjEstimate { p_hat: mean, ci_halfwidth: half, sources: count, ground_nodes: n, uavs: uavs.len() })
}

/// Sample mean and normal-approximation 95% half-width; zero width for one value.
fn mean_ci(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, 1.96 * (var / n).sqrt())
}

/// Rows for one family value (or the only family).
#[derive(Debug, Clone, PartialEq)]
pub struct FamilyResult {
    pub value: Option<f64>,
    pub rows: Vec<ResultRow>,
    /// Success probability used at each sweep point (multistream only).
    pub success_probs: Vec<Option<f64>>,
}

/// One (family value, sweep value) combination with its success probability
/// resolved.
#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub family: Option<f64>,
    pub value: f64,
    pub cfg: ScenarioConfig,
    /// `Ok(None)` for the tandem system; `Err` if estimation failed.
    pub p: Result<Option<f64>, String>,
}

impl SweepPoint {
    /// The flow set at this point, if it is a multistream point with a usable
    /// success probability.
    pub fn flow_set(&self) -> Option<FlowSet> {
        let f = self.cfg.flows.as_ref()?;
        let p = *self.p.as_ref().ok()?.as_ref()?;
        Some(FlowSet { rates: f.layout.rates(), p_success: p, service: f.service })
    }
}

#[derive(Debug, Clone, Copy)]
struct RepOutcome {
    aoi: f64,
    peak: f64,
}

fn family_configs(cfg: &ScenarioConfig) -> Result<Vec<(Option<f64>, ScenarioConfig)>, HarnessError> {
    match &cfg.family {
        None => Ok(vec![(None, cfg.clone())]),
        Some(f) => f.values.iter().map(|&v| Ok((Some(v), cfg.with(f.param, v)?))).collect(),
    }
}

fn estimation_key(cfg: &ScenarioConfig) -> String {
    format!("{:?}|{:?}|{:?}|{}|{}", cfg.spatial, cfg.window, cfg.channel.config, cfg.channel.samples, cfg.channel.sources)
}

/// Every sweep point, grouped by family value in file order. Estimated
/// success probabilities are computed once per distinct spatial/channel setup.
pub fn sweep_points(cfg: &ScenarioConfig) -> Result<Vec<Vec<SweepPoint>>, HarnessError> {
    let estimation_seed = seed::derive(cfg.root_seed, Stream::Estimation, 0);
    let mut cache: HashMap<String, Result<f64, String>> = HashMap::new();
    let mut out = Vec::new();
    for (family, fam_cfg) in family_configs(cfg)? {
        let mut points = Vec::new();
        for &v in &cfg.sweep.values {
            let pcfg = fam_cfg.with(cfg.sweep.param, v)?;
            let p = match pcfg.flows.as_ref().map(|f| f.success) {
                None => Ok(None),
                Some(SuccessProb::Fixed(p)) => Ok(Some(p)),
                Some(SuccessProb::Estimated) => cache
                    .entry(estimation_key(&pcfg))
                    .or_insert_with(|| estimate_psj(&pcfg, estimation_seed).map(|e| e.p_hat).map_err(|e| e.to_string()))
                    .clone()
                    .map(Some),
            };
            points.push(SweepPoint { family, value: v, cfg: pcfg, p });
        }
        out.push(points);
    }
    Ok(out)
}

fn analytic(point: &SweepPoint) -> Result<(f64, Option<f64>), AnalyticError> {
    match point.cfg.system {
        SystemKind::Multistream => {
            let flows = point.flow_set().ok_or_else(|| AnalyticError::InvalidFlows("no success probability".into()))?;
            flows.validate()?;
            let model = point.cfg.flows.as_ref().map(|f| f.analytic).unwrap_or(AnalyticModel::Mm11);
            let aoi = match model {
                AnalyticModel::Mm11 => mm11_average_aoi(&flows, 0)?,
                AnalyticModel::Mg11 => mg11_average_aoi(&flows, 0)?,
            };
            Ok((aoi, None))
        }
        SystemKind::Tandem => {
            let t = point.cfg.chain.as_ref().expect("tandem point has a chain");
            let chain = t.chain();
            Ok((chain_aoi_approx(&chain, t.xi)?, Some(chain_aoi_upper(&chain, t.xi)?)))
        }
    }
}

fn replicate(point: &SweepPoint, seed: u64) -> Result<RepOutcome, DesError> {
    let cfg = &point.cfg;
    match cfg.system {
        SystemKind::Multistream => {
            let flows = match &point.p {
                Err(e) => return Err(DesError::InvalidInput(e.clone())),
                Ok(_) => point.flow_set().ok_or_else(|| DesError::InvalidInput("no success probability".into()))?,
            };
            let run = simulate_multistream(&flows, cfg.horizon, seed)?;
            Ok(RepOutcome { aoi: run.stats[0].time_avg_aoi, peak: run.stats[0].mean_peak_aoi })
        }
        SystemKind::Tandem => {
            let t = cfg.chain.as_ref().expect("tandem point has a chain");
            let run = simulate_tandem(&t.chain(), t.xi, cfg.horizon, seed)?;
            Ok(RepOutcome { aoi: run.stats.time_avg_aoi, peak: run.stats.mean_peak_aoi })
        }
    }
}

fn row_for(value: f64, analytic: Result<(f64, Option<f64>), AnalyticError>, reps: &[Result<RepOutcome, DesError>]) -> ResultRow {
    let des_status = reps.iter().find_map(|r| match r {
        Ok(_) => None,
        Err(DesError::Unstable { .. }) => Some(RowStatus::Unstable),
        Err(DesError::HorizonTooShort { .. }) => Some(RowStatus::HorizonTooShort),
        Err(_) => Some(RowStatus::Error),
    });
    let analytic_status = match &analytic {
        Ok(_) => None,
        Err(AnalyticError::Unstable { .. }) => Some(RowStatus::Unstable),
        Err(AnalyticError::Overloaded { .. }) => Some(RowStatus::Overloaded),
        Err(_) => Some(RowStatus::Error),
    };
    let (analytic_aoi, analytic_upper) = match analytic {
        Ok((a, u)) => (Some(a), u),
        Err(_) => (None, None),
    };
    let (sim_aoi, sim_ci, sim_peak_aoi) = if des_status.is_none() {
        let ok: Vec<RepOutcome> = reps.iter().map(|r| *r.as_ref().expect("all replications succeeded")).collect();
        let (aoi, ci) = mean_ci(&ok.iter().map(|o| o.aoi).collect::<Vec<_>>());
        let (peak, _) = mean_ci(&ok.iter().map(|o| o.peak).collect::<Vec<_>>());
        (Some(aoi), Some(ci), Some(peak))
    } else {
        (None, None, None)
    };
    ResultRow {
        sweep_value: value,
        analytic_aoi,
        analytic_upper,
        sim_aoi,
        sim_ci,
        sim_peak_aoi,
        rel_error: ResultRow::signed_rel_error(analytic_aoi, sim_aoi),
        status: des_status.or(analytic_status).unwrap_or(RowStatus::Ok),
    }
}

/// Runs every (family, sweep point, replication) job. Jobs execute in
/// parallel; results are assembled by index, so output does not depend on
/// the thread count. Per-point failures are recorded in the row status.
pub fn run_sweep(cfg: &ScenarioConfig) -> Result<Vec<FamilyResult>, HarnessError> {
    cfg.validate()?;
    let points = sweep_points(cfg)?;
    let n_sweep = cfg.sweep.values.len();
    let reps = cfg.replications;
    let jobs: Vec<(usize, usize, usize)> = (0..points.len())
        .flat_map(|f| (0..n_sweep).flat_map(move |s| (0..reps).map(move |r| (f, s, r))))
        .collect();
    let outcomes: Vec<Result<RepOutcome, DesError>> = jobs
        .par_iter()
        .map(|&(f, s, r)| {
            let seed = seed::derive(seed::derive(cfg.root_seed, Stream::SweepPoint, s as u64), Stream::Replication, r as u64);
            replicate(&points[f][s], seed)
        })
        .collect();

    let mut results = Vec::with_capacity(points.len());
    for (f, fam_points) in points.iter().enumerate() {
        let mut indexed: Vec<(ResultRow, Option<f64>)> = fam_points
            .iter()
            .enumerate()
            .map(|(s, point)| {
                let start = (f * n_sweep + s) * reps;
                let row = row_for(point.value, analytic(point), &outcomes[start..start + reps]);
                (row, point.p.clone().ok().flatten())
            })
            .collect();
        indexed.sort_by(|a, b| a.0.sweep_value.total_cmp(&b.0.sweep_value));
        let (rows, success_probs) = indexed.into_iter().unzip();
        results.push(FamilyResult { value: fam_points[0].family, rows, success_probs });
    }
    Ok(results)
}

#[derive(Debug)]
pub struct RunOutput {
    pub families: Vec<FamilyResult>,
    pub csv_files: Vec<PathBuf>,
    pub report_file: PathBuf,
    pub reports: Vec<DiscrepancyReport>,
}

fn family_file_name(cfg: &ScenarioConfig, value: Option<f64>) -> String {
    match (&cfg.family, value) {
        (Some(f), Some(v)) => format!("{}_{}_{}.csv", cfg.name, f.param.short_name(), v),
        _ => format!("{}.csv", cfg.name),
    }
}

/// Runs the sweep and writes one CSV per family value plus
/// `discrepancies.txt` into `out_dir`.
pub fn run_scenario(cfg: &ScenarioConfig, out_dir: &Path) -> Result<RunOutput, HarnessError> {
    let families = run_sweep(cfg)?;
    std::fs::create_dir_all(out_dir)?;
    let mut csv_files = Vec::new();
    let mut reports = Vec::new();
    let mut text = format!("scenario: {}\nsweep: {}\n", cfg.name, cfg.sweep.param);
    for fam in &families {
        let path = out_dir.join(family_file_name(cfg, fam.value));
        emit_csv(&fam.rows, &path)?;
        csv_files.push(path);

        let check_flows = match (&cfg.flows, fam.success_probs.iter().flatten().next()) {
            (Some(template), Some(&p)) if p > 0.0 && p < 1.0 && template.service.scv == 1.0 => {
                FlowSet { rates: template.layout.rates(), p_success: p, service: template.service }
            }
            _ => reference_flows(),
        };
        let report = compare_analytic_vs_des(&fam.rows, cfg.tolerance, &check_flows)?;
        text.push('\n');
        if let (Some(f), Some(v)) = (&cfg.family, fam.value) {
            text.push_str(&format!("== family {} = {} ==\n", f.param, v));
        }
        text.push_str(&report.to_string());
        reports.push(report);
    }
    let report_file = out_dir.join("discrepancies.txt");
    std::fs::write(&report_file, text)?;
    Ok(RunOutput { families, csv_files, report_file, reports })
}
