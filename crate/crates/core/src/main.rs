use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use aoi_ntn::harness::{
    compare_analytic_vs_des, estimate_psj, load_scenario, parse_csv, reference_flows, run_scenario, FlowTemplate,
    HarnessError, RowStatus, SuccessProb, SystemKind,
};
use aoi_ntn::seed::{self, Stream};
use aoi_ntn::FlowSet;

#[derive(Parser)]
#[command(name = "aoi-ntn", version, about = "Age-of-Information sweeps for air-ground and satellite relay links")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario sweep and write CSV results plus discrepancies.txt.
    Run {
        scenario: PathBuf,
        #[arg(long, default_value = "results")]
        out: PathBuf,
        /// Override the root seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        replications: Option<usize>,
        #[arg(long)]
        horizon: Option<f64>,
    },
    /// Compare the analytic and simulated columns of a results file.
    Compare {
        results: PathBuf,
        #[arg(long)]
        tolerance: f64,
        /// Take the flow set for the MGF cross-check from this scenario.
        #[arg(long)]
        scenario: Option<PathBuf>,
    },
    /// Estimate the spatially averaged success probability of a scenario.
    EstimatePsj { scenario: PathBuf },
}

fn exit_code(e: &HarnessError) -> ExitCode {
    match e {
        HarnessError::Parse { .. } | HarnessError::Validation { .. } => ExitCode::from(1),
        _ => ExitCode::from(2),
    }
}

fn flows_from(template: &FlowTemplate, p: f64) -> FlowSet {
    FlowSet { rates: template.layout.rates(), p_success: p, service: template.service }
}

fn run(cli: Cli) -> Result<(), HarnessError> {
    match cli.command {
        Command::Run { scenario, out, seed, replications, horizon } => {
            let mut cfg = load_scenario(&scenario)?;
            if let Some(s) = seed {
                cfg.root_seed = s;
            }
            if let Some(r) = replications {
                cfg.replications = r;
            }
            if let Some(h) = horizon {
                cfg.horizon = h;
            }
            cfg.validate()?;
            let output = run_scenario(&cfg, &out)?;
            for (path, fam) in output.csv_files.iter().zip(&output.families) {
                let bad = fam.rows.iter().filter(|r| r.status != RowStatus::Ok).count();
                println!("wrote {} ({} rows, {} not ok)", path.display(), fam.rows.len(), bad);
            }
            println!("wrote {}", output.report_file.display());
        }
        Command::Compare { results, tolerance, scenario } => {
            if tolerance.is_nan() || tolerance < 0.0 {
                return Err(HarnessError::Validation { field: "tolerance".into(), constraint: "must be >= 0".into() });
            }
            let rows = parse_csv(&results)?;
            let flows = match scenario {
                Some(path) => {
                    let cfg = load_scenario(&path)?;
                    match (&cfg.flows, cfg.flows.as_ref().map(|f| f.success)) {
                        (Some(t), Some(SuccessProb::Fixed(p))) if t.service.scv == 1.0 => flows_from(t, p),
                        _ => reference_flows(),
                    }
                }
                None => reference_flows(),
            };
            print!("{}", compare_analytic_vs_des(&rows, tolerance, &flows)?);
        }
        Command::EstimatePsj { scenario } => {
            let cfg = load_scenario(&scenario)?;
            let est = estimate_psj(&cfg, seed::derive(cfg.root_seed, Stream::Estimation, 0))?;
            let system = match cfg.system {
                SystemKind::Multistream => "multistream",
                SystemKind::Tandem => "tandem",
            };
            println!("scenario: {} ({system})", cfg.name);
            println!("ground nodes: {}  uavs: {}  sources sampled: {}", est.ground_nodes, est.uavs, est.sources);
            println!("p_sj = {} +/- {}", est.p_hat, est.ci_halfwidth);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
