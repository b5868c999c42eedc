//! `dsp`: expected pickups under discrete sequential packing (exact,
//! asymptotic, simulated), routing heuristics, incentive-rate optimization,
//! and the end-to-end case studies.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Parser, Subcommand};

use commands::*;
use config::{
    parse_depot, parse_metric, parse_point, parse_sweep, resolve_params, resolve_seed, CliError,
};
use dsp_core::scenarios::DepotPlacement;
use dsp_core::BundlePmf;

#[derive(Parser)]
#[command(
    name = "dsp",
    version,
    about = "Discrete sequential packing for mixed private-driver/van last-mile delivery",
    propagate_version = true
)]
struct Cli {
    /// Bound the worker thread count for parallel sections.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact expected pickups/remaining from the coefficient tables.
    Exact {
        /// Bundle-size pmf: det:m, uniform:a..b, tpois:mean,max, list:p1,p2,...
        #[arg(long)]
        pmf: String,
        /// Number of packages.
        #[arg(long)]
        n: usize,
        /// Request rate per location per hour.
        #[arg(long)]
        lambda: f64,
        /// Evaluation time in hours.
        #[arg(long, default_value_t = 0.0)]
        t: f64,
        /// Topology: line or circle.
        #[arg(long, default_value = "line")]
        topology: String,
        /// Emit CSV (t,value) over t0:t1:steps instead of JSON.
        #[arg(long)]
        sweep: Option<String>,
    },
    /// Limiting pickup proportion alpha(t, lambda) by quadrature.
    Alpha {
        #[arg(long)]
        pmf: Option<String>,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long)]
        t: Option<f64>,
        /// Absolute quadrature tolerance.
        #[arg(long, default_value_t = 1e-10)]
        quad_tol: f64,
        /// Deterministic-bundle closed form for P(B=m)=1 instead.
        #[arg(long)]
        pinsky: Option<usize>,
    },
    /// Monte Carlo estimate of the circle pickup count.
    Simulate {
        #[arg(long)]
        pmf: String,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        lambda: f64,
        /// Pickup window length in hours.
        #[arg(long = "T")]
        horizon: f64,
        #[arg(long)]
        reps: usize,
        /// Seed (falls back to DSP_SEED, then 0).
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Heuristic TSP or CVRP over an instance CSV (header `x,y`).
    #[command(group(ArgGroup::new("mode").required(true).args(["tsp", "cvrp"])))]
    Route {
        #[arg(long)]
        tsp: bool,
        #[arg(long)]
        cvrp: bool,
        /// Van capacity in packages (CVRP).
        #[arg(long, default_value_t = 200)]
        capacity: usize,
        /// Distance metric: l1 or l2.
        #[arg(long, default_value = "l1")]
        metric: String,
        /// Depot coordinates `x,y` (defaults to the origin).
        #[arg(long)]
        depot: Option<String>,
        file: PathBuf,
    },
    /// Optimal incentive rate for an instance, with per-package prices.
    Optimize {
        #[arg(long)]
        instance: PathBuf,
        /// TOML/JSON file overriding the calibrated defaults.
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long)]
        pmf: Option<String>,
        /// Depot coordinates `x,y` (defaults to the origin).
        #[arg(long)]
        depot: Option<String>,
        #[arg(long, default_value = "l1")]
        metric: String,
        /// Output path for the per-package price CSV.
        #[arg(long)]
        prices_out: Option<PathBuf>,
    },
    /// Full mixed-vs-van-only case study.
    CaseStudy {
        /// uniform or clusters.
        #[arg(long)]
        scenario: String,
        #[arg(long, default_value_t = 2000)]
        n: usize,
        /// Side of the square region in miles.
        #[arg(long, default_value_t = 5.0)]
        side: f64,
        /// Number of pickup-simulation replications.
        #[arg(long, default_value_t = 5)]
        seeds: usize,
        /// Base seed for the pickup replications.
        #[arg(long)]
        seed: Option<u64>,
        /// Seed for destination generation.
        #[arg(long, default_value_t = 7)]
        scenario_seed: u64,
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long)]
        pmf: Option<String>,
        /// center, corner, or `x,y`.
        #[arg(long, default_value = "center")]
        depot: String,
        /// Write the JSON report here as well as stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Directory for plot-data CSVs (objective curve, leftover routes,
        /// neighbor density).
        #[arg(long)]
        plot_data: Option<PathBuf>,
    },
    /// Neighbor-distance statistics of heuristic tours over many instances.
    TspDensity {
        /// uniform or clusters.
        #[arg(long)]
        scenario: String,
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long, default_value_t = 50)]
        seeds: usize,
        #[arg(long, default_value_t = 40)]
        bins: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "l1")]
        metric: String,
        /// Histogram CSV output path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(command: Command) -> Result<Option<serde_json::Value>, CliError> {
    match command {
        Command::Exact { pmf, n, lambda, t, topology, sweep } => {
            let parsed = BundlePmf::parse_spec(&pmf).map_err(CliError::config)?;
            let circle = match topology.as_str() {
                "line" => false,
                "circle" => true,
                other => {
                    return Err(CliError::config(format!(
                        "unknown topology `{other}` (expected line or circle)"
                    )))
                }
            };
            let sweep = sweep
                .map(|s| parse_sweep(&s).map_err(CliError::config))
                .transpose()?;
            cmd_exact(&ExactArgs { pmf: parsed, pmf_spec: pmf, n, lambda, t, circle, sweep })
        }
        Command::Alpha { pmf, lambda, t, quad_tol, pinsky } => {
            let (parsed, spec) = match (&pmf, pinsky) {
                (_, Some(_)) => (BundlePmf::deterministic(2), String::new()),
                (Some(spec), None) => {
                    (BundlePmf::parse_spec(spec).map_err(CliError::config)?, spec.clone())
                }
                (None, None) => {
                    return Err(CliError::config("alpha requires --pmf (or --pinsky m)"))
                }
            };
            if pinsky.is_none() && (lambda.is_none() || t.is_none()) {
                return Err(CliError::config("alpha requires --lambda and --t"));
            }
            cmd_alpha(&AlphaArgs {
                pmf: parsed,
                pmf_spec: spec,
                lambda: lambda.unwrap_or(1.0),
                t: t.unwrap_or(0.0),
                quad_tol,
                pinsky,
            })
        }
        Command::Simulate { pmf, n, lambda, horizon, reps, seed } => {
            let parsed = BundlePmf::parse_spec(&pmf).map_err(CliError::config)?;
            let seed = resolve_seed(seed)?;
            cmd_simulate(&SimulateArgs {
                pmf: parsed,
                pmf_spec: pmf,
                n,
                lambda,
                horizon,
                reps,
                seed,
            })
        }
        Command::Route { tsp: _, cvrp, capacity, metric, depot, file } => {
            let metric = parse_metric(&metric).map_err(CliError::config)?;
            let depot = depot
                .map(|d| parse_point(&d).map_err(CliError::config))
                .transpose()?
                .unwrap_or([0.0, 0.0]);
            cmd_route(&RouteArgs { file, cvrp, capacity, metric, depot })
        }
        Command::Optimize { instance, params, pmf, depot, metric, prices_out } => {
            let resolved = resolve_params(params.as_deref(), pmf.as_deref())?;
            let metric = parse_metric(&metric).map_err(CliError::config)?;
            let depot = depot
                .map(|d| parse_point(&d).map_err(CliError::config))
                .transpose()?
                .unwrap_or([0.0, 0.0]);
            cmd_optimize(&OptimizeArgs { instance, resolved, depot, metric, prices_out })
        }
        Command::CaseStudy {
            scenario,
            n,
            side,
            seeds,
            seed,
            scenario_seed,
            params,
            pmf,
            depot,
            out,
            plot_data,
        } => {
            let resolved = resolve_params(params.as_deref(), pmf.as_deref())?;
            let depot: DepotPlacement = parse_depot(&depot).map_err(CliError::config)?;
            let base_seed = resolve_seed(seed)?;
            cmd_case_study(&CaseStudyArgs {
                scenario,
                n,
                side,
                scenario_seed,
                n_seeds: seeds,
                base_seed,
                resolved,
                depot,
                out,
                plot_data,
            })
        }
        Command::TspDensity { scenario, n, seeds, bins, seed, metric, out } => {
            let metric = parse_metric(&metric).map_err(CliError::config)?;
            let base_seed = resolve_seed(seed)?;
            cmd_tsp_density(&TspDensityArgs { scenario, n, seeds, bins, base_seed, metric, out })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        // Ignore failure if a global pool already exists.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    match run(cli.command) {
        Ok(Some(doc)) => {
            println!("{}", serde_json::to_string_pretty(&doc).expect("serializable output"));
            ExitCode::SUCCESS
        }
        Ok(None) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("{err}");
            ExitCode::from(err.exit_code())
        }
    }
}
