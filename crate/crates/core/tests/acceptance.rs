//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use aoi_ntn::analytic::{
    chain_aoi_approx, chain_aoi_upper, chain_success_probability, cross_traffic_rate, mg11_average_aoi, mg11_peak_aoi,
    mgf_departure_mm11, mm11_average_aoi, mm11_departure_moments, node_arrival_rate, node_response_rate, AnalyticError,
    FlowSet, SatelliteChain, SatelliteNode, ServiceSpec,
};
use aoi_ntn::channel::{estimate_success_probability, noise_only_success_probability, sinr, Activity, ChannelConfig, Link, LinkSample};
use aoi_ntn::des::{renewal_identity_residual, simulate_multistream, simulate_tandem, DeliveryTrace};
use aoi_ntn::harness::{
    load_scenario, read_rows, run_scenario, run_sweep, sweep_points, write_rows, AnalyticModel, FamilyResult, ResultRow,
    RowStatus, ScenarioConfig, SuccessProb, SystemKind,
};
use aoi_ntn::seed::{self, Stream};
use aoi_ntn::spatial::{
    associate_nearest, composite_density, sample_ground_pattern, Origin, Point, PointPattern, SpatialConfig, Window,
};
use rand::{Rng, SeedableRng};

type Outcome = Result<String, String>;

const SHIPPED: [&str; 4] = ["fig3", "fig4", "fig5", "fig5_hops"];

fn scenario(name: &str) -> ScenarioConfig {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(format!("{name}.scenario"));
    load_scenario(&path).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn pool(threads: usize) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().expect("thread pool")
}

fn csv_bytes(families: &[FamilyResult]) -> Vec<Vec<u8>> {
    families
        .iter()
        .map(|f| {
            let mut buf = Vec::new();
            write_rows(&f.rows, &mut buf).expect("in-memory csv");
            buf
        })
        .collect()
}

fn sim(r: &ResultRow) -> Result<(f64, f64), String> {
    match (r.sim_aoi, r.sim_ci) {
        (Some(a), Some(c)) => Ok((a, c)),
        _ => Err(format!("row {} has no simulated value (status {})", r.sweep_value, r.status)),
    }
}

/// `a` lies below `b` with non-overlapping 95% intervals.
fn below(a: (f64, f64), b: (f64, f64)) -> bool {
    a.0 + a.1 < b.0 - b.1
}

fn family(fams: &[FamilyResult], value: f64) -> Result<&FamilyResult, String> {
    fams.iter().find(|f| f.value == Some(value)).ok_or_else(|| format!("no family {value}"))
}

// 1 -------------------------------------------------------------------------

const RENEWAL_DELIVERIES: usize = 10_000;

/// Runs one replication at `point`, lengthening the horizon until every
/// trace holds enough deliveries.
fn long_traces(cfg: &ScenarioConfig, flows: Option<&FlowSet>, seed: u64) -> Result<Vec<DeliveryTrace>, String> {
    let mut horizon = cfg.horizon;
    for _ in 0..4 {
        let traces = match (cfg.system, flows) {
            (SystemKind::Multistream, Some(f)) => simulate_multistream(f, horizon, seed).map_err(|e| e.to_string())?.traces,
            (SystemKind::Tandem, _) => {
                let t = cfg.chain.as_ref().ok_or("tandem point without chain")?;
                vec![simulate_tandem(&t.chain(), t.xi, horizon, seed).map_err(|e| e.to_string())?.trace]
            }
            _ => return Err("multistream point without a flow set".into()),
        };
        let fewest = traces.iter().map(DeliveryTrace::len).min().unwrap_or(0);
        if fewest >= RENEWAL_DELIVERIES {
            return Ok(traces);
        }
        horizon *= 1.2 * RENEWAL_DELIVERIES as f64 / fewest.max(1) as f64;
    }
    Err("could not reach the delivery count".into())
}

fn renewal_identity() -> Outcome {
    let mut worst: (f64, String) = (0.0, String::new());
    let mut traces_checked = 0;
    let mut slowest = 0.0f64;
    for name in SHIPPED {
        let cfg = scenario(name);
        let points = sweep_points(&cfg).map_err(|e| e.to_string())?;
        for (k, point) in points.iter().flatten().enumerate() {
            let start = Instant::now();
            let traces = long_traces(&point.cfg, point.flow_set().as_ref(), seed::derive(cfg.root_seed, Stream::Replication, k as u64))?;
            slowest = slowest.max(start.elapsed().as_secs_f64() / traces.len() as f64);
            for t in &traces {
                let r = renewal_identity_residual(t).map_err(|e| e.to_string())?;
                traces_checked += 1;
                if r > worst.0 {
                    worst = (r, format!("{name} at {} = {}", cfg.sweep.param, point.value));
                }
            }
        }
    }
    let msg = format!("{traces_checked} traces, worst residual {:.3e} ({}), slowest trace {slowest:.2}s", worst.0, worst.1);
    if worst.0 < 0.01 && slowest < 10.0 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

// 2 -------------------------------------------------------------------------

fn closed_form_spot_checks() -> Outcome {
    let e = |x: Result<f64, AnalyticError>| x.map_err(|e| e.to_string());
    let reference = FlowSet { rates: vec![1.0, 2.0], p_success: 0.5, service: ServiceSpec::exponential(2.0).unwrap() };
    let gamma_set = FlowSet { rates: vec![1.5, 1.5], p_success: 0.8, service: ServiceSpec::gamma(3.0, 1.0).unwrap() };
    let two = SatelliteChain { nodes: vec![SatelliteNode::new(5.0, 0.1, 1.0, 0.2), SatelliteNode::new(5.0, 0.2, 0.5, 0.3)], p_a: 0.9 };
    let single = SatelliteChain { nodes: vec![SatelliteNode::new(5.0, 0.0, 0.0, 0.0)], p_a: 1.0 };
    let moments = mm11_departure_moments(&reference, 0).map_err(|e| e.to_string())?;
    let cluster_only = SpatialConfig { m1: 0.0, lambda1: 0.01, m2: 1.0, lambda_p2: 0.002, lambda_c2: 0.015, r_c: 5.0, lambda_a: 0.0 };
    let mixed = SpatialConfig { m1: 0.5, m2: 0.5, ..cluster_only };
    let link = LinkSample { serving: Link { distance: 2.0, fading: 1.0 }, interferers: vec![] };
    let ch = ChannelConfig { alpha: 4.0, noise: 0.1, theta: 1.0 };

    let checks: Vec<(&str, f64, f64)> = vec![
        ("E[Y]", moments.ey, (1.5 + 2.0) / (2.0 * 1.0 * 0.5)),
        ("E[Y^2]", moments.ey2, (2.0 * 3.5f64.powi(2) - 2.0 * 2.0 * 1.0 * 0.25) / (0.25 * 4.0)),
        ("M/M/1/1 AoI", e(mm11_average_aoi(&reference, 0))?, 0.5 + 23.5 / 7.0),
        ("MGF at 0", e(mgf_departure_mm11(0.0, &reference, 0))?, 0.5),
        ("M/G/1/1 AoI", e(mg11_average_aoi(&gamma_set, 0))?, 2.0 / 0.24 + 3.0 * (2.0 / 9.0) * 0.64 / (2.0 * (3.0 * 0.8 / 3.0 + 1.0))),
        ("M/G/1/1 peak", e(mg11_peak_aoi(&gamma_set, 0))?, 2.3 / 1.2),
        ("cross traffic", e(cross_traffic_rate(&two, 2))?, 1.0 * 0.8 * 0.9 + 0.5),
        ("chain success", e(chain_success_probability(&two, 2))?, 0.9 * 0.8 * 0.9),
        ("node arrival", e(node_arrival_rate(&two, 2, 2.0))?, 0.648 * 2.0 + 1.22),
        ("node response", e(node_response_rate(&two, 2, 2.0))?, 5.0 - 2.516),
        ("chain approx", e(chain_aoi_approx(&single, 2.0))?, 1.0 / 3.0 + 0.5),
        ("chain upper", e(chain_aoi_upper(&single, 2.0))?, 2.0 * (0.5 * 8.0 / 15.0 + 0.25)),
        ("cluster density", composite_density(&cluster_only), std::f64::consts::PI * 25.0 * 0.002 * 0.015),
        ("mixed density", composite_density(&mixed), 0.5 * 0.01 + 0.5 * std::f64::consts::PI * 25.0 * 0.002 * 0.015),
        ("SINR", sinr(&link, &ch).map_err(|e| e.to_string())?, 2f64.powi(-4) / 0.1),
        ("noise-only success", noise_only_success_probability(1.0, &ch), (-0.1f64).exp()),
    ];
    let bad: Vec<String> = checks
        .iter()
        .filter(|(_, got, want)| ((got - want) / want).abs() > 1e-9)
        .map(|(n, got, want)| format!("{n}: {got} vs {want}"))
        .collect();
    if bad.is_empty() {
        Ok(format!("{} expressions within 1e-9 relative", checks.len()))
    } else {
        Err(bad.join("; "))
    }
}

// 3 -------------------------------------------------------------------------

fn bound_ordering() -> Outcome {
    let mut rng = rand_pcg::Pcg64::seed_from_u64(seed::derive(2024, Stream::Tandem, 0));
    let (mut checked, mut violations, mut rejected) = (0, 0, 0);
    while checked < 200 {
        let k = [1usize, 2, 4][checked % 3];
        let nodes = (0..k)
            .map(|_| {
                SatelliteNode::new(rng.random_range(0.5..5.0), rng.random_range(0.0..0.5), rng.random_range(0.0..1.0), rng.random_range(0.0..=1.0))
            })
            .collect();
        let chain = SatelliteChain { nodes, p_a: rng.random_range(0.05..=1.0) };
        let xi = rng.random_range(0.01..3.0);
        match (chain_aoi_approx(&chain, xi), chain_aoi_upper(&chain, xi)) {
            (Ok(a), Ok(u)) => {
                checked += 1;
                if u < a {
                    violations += 1;
                }
            }
            _ => rejected += 1,
        }
    }
    let msg = format!("{checked} stable configurations ({rejected} unstable draws skipped), {violations} violations");
    if violations == 0 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

// 4 -------------------------------------------------------------------------

fn fig3_trend(fams: &[FamilyResult], elapsed: f64) -> Outcome {
    let mut problems = Vec::new();
    for f in fams {
        for w in f.rows.windows(2) {
            if !below(sim(&w[1])?, sim(&w[0])?) {
                problems.push(format!("mu={:?}: not decreasing between xi1={} and {}", f.value, w[0].sweep_value, w[1].sweep_value));
            }
        }
    }
    let (slow, fast) = (family(fams, 4.0)?, family(fams, 8.0)?);
    for (a, b) in slow.rows.iter().zip(&fast.rows) {
        if !below(sim(b)?, sim(a)?) {
            problems.push(format!("xi1={}: mu=8 not below mu=4", a.sweep_value));
        }
    }
    if elapsed >= 120.0 {
        problems.push(format!("took {elapsed:.1}s"));
    }
    let msg = format!("{} points x {} service rates, {elapsed:.1}s", slow.rows.len(), fams.len());
    if problems.is_empty() {
        Ok(msg)
    } else {
        Err(format!("{msg}: {}", problems.join("; ")))
    }
}

// 5 -------------------------------------------------------------------------

fn fig4_trend(cfg: &ScenarioConfig, fams: &[FamilyResult]) -> Outcome {
    let mut problems = Vec::new();
    let n = fams[0].rows.len();
    for s in 0..n {
        for w in fams.windows(2) {
            let (a, b) = (&w[0].rows[s], &w[1].rows[s]);
            match (a.analytic_aoi, b.analytic_aoi) {
                (Some(x), Some(y)) if y > x => {}
                _ => problems.push(format!("analytic not increasing at {} between scv {:?} and {:?}", a.sweep_value, w[0].value, w[1].value)),
            }
            if sim(b)?.0 <= sim(a)?.0 {
                problems.push(format!("simulated not increasing at {} between scv {:?} and {:?}", a.sweep_value, w[0].value, w[1].value));
            }
        }
    }

    // exponential service under the same seeds
    let mut expo = cfg.clone();
    expo.family = None;
    let flows = expo.flows.as_mut().ok_or("fig4 has no flows")?;
    flows.service = ServiceSpec::exponential(flows.service.rate).map_err(|e| e.to_string())?;
    flows.analytic = AnalyticModel::Mm11;
    let expo_rows = run_sweep(&expo).map_err(|e| e.to_string())?.remove(0).rows;
    let unit = family(fams, 1.0)?;
    let mut worst_gap = 0.0f64;
    for (g, x) in unit.rows.iter().zip(&expo_rows) {
        let (g, x) = (sim(g)?, sim(x)?);
        let gap = (g.0 - x.0).abs() / (g.1 + x.1);
        worst_gap = worst_gap.max(gap);
        if gap > 1.0 {
            problems.push(format!("gamma(scv=1) {} vs exponential {} outside intervals", g.0, x.0));
        }
    }
    let msg = format!("{} densities x {} scv values; gamma(1) vs exponential gap at most {worst_gap:.2} of the joint half-width", n, fams.len());
    if problems.is_empty() {
        Ok(msg)
    } else {
        Err(format!("{msg}: {}", problems.join("; ")))
    }
}

// 6 -------------------------------------------------------------------------

fn max_abs_rel_error(f: &FamilyResult) -> f64 {
    f.rows.iter().filter_map(|r| r.rel_error).map(f64::abs).fold(0.0, f64::max)
}

fn fig5_trends(fig5: &[FamilyResult], hops: &[FamilyResult]) -> Outcome {
    let mut problems = Vec::new();
    for f in fig5 {
        let vals: Vec<(f64, f64)> = f.rows.iter().map(sim).collect::<Result<_, _>>()?;
        let argmin = vals.iter().enumerate().min_by(|a, b| a.1 .0.total_cmp(&b.1 .0)).map(|(i, _)| i).unwrap_or(0);
        let interior = argmin > 0 && argmin + 1 < vals.len() && below(vals[argmin], vals[0]) && below(vals[argmin], vals[vals.len() - 1]);
        if !interior {
            problems.push(format!("(a) p_a={:?}: no interior minimum", f.value));
        }
    }
    let (low, high) = (family(fig5, 0.7)?, family(fig5, 0.9)?);
    for (a, b) in low.rows.iter().zip(&high.rows) {
        if !below(sim(b)?, sim(a)?) {
            problems.push(format!("(b) xi={}: p_a=0.9 not below p_a=0.7 beyond CI", a.sweep_value));
        }
    }
    let (k1, k4) = (max_abs_rel_error(family(hops, 1.0)?), max_abs_rel_error(family(hops, 4.0)?));
    if k4 <= k1 {
        problems.push(format!("(c) max error K=4 {k4:.3} not above K=1 {k1:.3}"));
    }
    let msg = format!("interior minima found; p_a ordering at {} points; max |rel error| K=1 {k1:.3}, K=4 {k4:.3}", low.rows.len());
    if problems.is_empty() {
        Ok(msg)
    } else {
        Err(problems.join("; "))
    }
}

// 7 -------------------------------------------------------------------------

fn spatial_density() -> Outcome {
    let start = Instant::now();
    let cfg = scenario("fig4").spatial;
    let window = Window::square(200.0).map_err(|e| e.to_string())?;
    let reps = 100;
    let intensities: Vec<f64> = (0..reps)
        .map(|r| sample_ground_pattern(&cfg, &window, seed::derive(77, Stream::Replication, r)).len() as f64 / window.area())
        .collect();
    let n = reps as f64;
    let mean = intensities.iter().sum::<f64>() / n;
    let se = (intensities.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) / n).sqrt();
    let target = composite_density(&cfg);
    let z = (mean - target) / se;
    let elapsed = start.elapsed().as_secs_f64();
    let msg = format!("empirical {mean:.5e} vs {target:.5e}, z = {z:.2}, {elapsed:.2}s");
    if z.abs() < 3.0 && elapsed < 5.0 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

// 8 -------------------------------------------------------------------------

fn channel_oracle() -> Outcome {
    let start = Instant::now();
    let cfg = ChannelConfig { alpha: 4.0, noise: 0.2, theta: 1.0 };
    // a source, its UAV, and silent neighbours
    let pts = vec![Point::new(0.0, 0.0), Point::new(3.0, 1.0), Point::new(-2.0, 4.0), Point::new(0.5, -3.0)];
    let ground = PointPattern { origins: vec![Origin::Ppp; pts.len()], points: pts, parents: vec![] };
    let uavs = PointPattern { points: vec![Point::new(1.2, 0.0)], origins: vec![Origin::Ppp], parents: vec![] };
    let assoc = associate_nearest(&ground, &uavs).map_err(|e| e.to_string())?;
    let exact = noise_only_success_probability(1.2, &cfg);
    let mut covered = 0;
    for s in 0..100u64 {
        let est = estimate_success_probability(&ground, &uavs, &assoc, 0, &cfg, Activity::Fixed(0.0), 10_000, seed::derive(8, Stream::Channel, s))
            .map_err(|e| e.to_string())?;
        if (est.p_hat - exact).abs() <= est.ci_halfwidth {
            covered += 1;
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    let msg = format!("{covered}/100 intervals cover exp(-theta W r0^alpha) = {exact:.6}, {elapsed:.2}s");
    if covered >= 93 && elapsed < 10.0 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

// 9 -------------------------------------------------------------------------

/// The operating point is pinned to the success probability estimated under
/// the shipped seed, so only the simulation seeds vary.
fn discrepancy_report() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let base = scenario("fig3");
    let p0 = sweep_points(&base).map_err(|e| e.to_string())?[0][0].p.clone()?.ok_or("fig3 has no success probability")?;
    let mut signs = Vec::new();
    for seed_value in [1u64, 2, 3] {
        let mut cfg = base.clone();
        cfg.flows.as_mut().ok_or("fig3 has no flows")?.success = SuccessProb::Fixed(p0);
        cfg.root_seed = seed_value;
        cfg.replications = 5;
        cfg.horizon = 2e4;
        let out_dir: PathBuf = dir.path().join(format!("seed{seed_value}"));
        let out = run_scenario(&cfg, &out_dir).map_err(|e| e.to_string())?;
        let report = std::fs::read_to_string(&out.report_file).map_err(|e| e.to_string())?;
        for (fam, rep) in out.families.iter().zip(&out.reports) {
            let p = fam.success_probs.iter().flatten().next().copied().ok_or("no success probability")?;
            if (rep.derivative_check.mgf_at_zero - (1.0 - p)).abs() > 1e-12 {
                return Err(format!("phi(0) = {} but 1-p = {}", rep.derivative_check.mgf_at_zero, 1.0 - p));
            }
            if rep.rows.len() != cfg.sweep.values.len() || rep.rows.iter().any(|r| r.rel_error.is_none()) {
                return Err(format!("seed {seed_value}: incomplete rows"));
            }
            signs.extend(rep.rows.iter().filter_map(|r| r.rel_error).map(f64::signum));
        }
        if !(report.contains("phi(0)") && report.contains("phi'(0)") && report.contains("phi''(0)")) {
            return Err("discrepancies.txt lacks the derivative cross-check".into());
        }
        for csv in &out.csv_files {
            let cmp = Command::new(env!("CARGO_BIN_EXE_aoi-ntn"))
                .args(["compare", csv.to_str().unwrap_or_default(), "--tolerance", "0.1"])
                .output()
                .map_err(|e| e.to_string())?;
            let text = String::from_utf8_lossy(&cmp.stdout);
            if !cmp.status.success() || !text.contains("phi(0)") {
                return Err(format!("compare on {} did not emit the cross-check", csv.display()));
            }
            let rows = read_rows(std::fs::File::open(csv).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
            if text.lines().filter(|l| l.ends_with("pass") || l.ends_with("FLAG")).count() != rows.len() {
                return Err("compare output is missing rows".into());
            }
        }
    }
    let positive = signs.iter().filter(|s| **s > 0.0).count();
    let msg = format!("p = {p0:.4}, 3 seeds x 2 families x 10 rows; {positive}/{} errors positive", signs.len());
    if positive == signs.len() || positive == 0 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

// 10 ------------------------------------------------------------------------

fn determinism(first: &[(&str, Vec<Vec<u8>>)]) -> Outcome {
    let single = pool(1);
    for (name, bytes) in first {
        let again = single.install(|| run_sweep(&scenario(name))).map_err(|e| e.to_string())?;
        if &csv_bytes(&again) != bytes {
            return Err(format!("{name}: output differs between 4 threads and 1 thread"));
        }
    }
    Ok(format!("{} scenarios byte-identical on 4 threads and on 1 thread", first.len()))
}

fn main() {
    let mut results: Vec<(u32, &str, Outcome)> = Vec::new();
    let mut report = |n: u32, title: &'static str, outcome: Outcome| {
        match &outcome {
            Ok(m) => println!("criterion {n:>2} [{title}]: PASS - {m}"),
            Err(m) => println!("criterion {n:>2} [{title}]: FAIL - {m}"),
        }
        results.push((n, title, outcome));
    };

    report(1, "renewal identity", renewal_identity());
    report(2, "closed-form spot checks", closed_form_spot_checks());
    report(3, "bound ordering", bound_ordering());

    let wide = pool(4);
    let mut first_runs = Vec::new();
    let mut sweep = |name: &'static str| -> Result<(Vec<FamilyResult>, f64), String> {
        let start = Instant::now();
        let fams = wide.install(|| run_sweep(&scenario(name))).map_err(|e| e.to_string())?;
        let elapsed = start.elapsed().as_secs_f64();
        first_runs.push((name, csv_bytes(&fams)));
        if let Some(r) = fams.iter().flat_map(|f| &f.rows).find(|r| r.status != RowStatus::Ok) {
            return Err(format!("{name}: row {} has status {}", r.sweep_value, r.status));
        }
        Ok((fams, elapsed))
    };

    report(4, "fig3 trend", sweep("fig3").and_then(|(f, t)| fig3_trend(&f, t)));
    report(5, "fig4 trend", sweep("fig4").and_then(|(f, _)| fig4_trend(&scenario("fig4"), &f)));
    let fig5 = sweep("fig5");
    let hops = sweep("fig5_hops");
    report(6, "fig5 trends", fig5.and_then(|(a, _)| hops.and_then(|(b, _)| fig5_trends(&a, &b))));
    report(7, "spatial density", spatial_density());
    report(8, "channel oracle", channel_oracle());
    report(9, "discrepancy report", discrepancy_report());
    report(10, "determinism", determinism(&first_runs));

    let failed = results.iter().filter(|r| r.2.is_err()).count();
    println!("acceptance: {}/{} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
