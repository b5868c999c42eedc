//! Subcommand implementations. Every command builds a JSON document that
//! echoes its resolved configuration (auditability) and is byte-identical
//! for identical invocations and seeds.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use dsp_core::asymptotic::{alpha, alpha_pinsky, AlphaQuery};
use dsp_core::exact::{ExactError, ExpectationQuery, GammaTable, GAMMA_STABILITY_CAP};
use dsp_core::pricing::{
    optimize_incentive, package_price, van_only_cost, CProvider, InstanceSummary,
};
use dsp_core::routing::{cvrp_solve, neighbor_density, tsp_tour, Instance, Metric};
use dsp_core::scenarios::{
    objective_curve, run_case_study, three_cluster_points, CaseStudyConfig, DepotPlacement,
    Scenario, ScenarioKind,
};
use dsp_core::sim::{derive_seed, leftover_destinations, mc_expected_pickups, simulate_circle};
use dsp_core::BundlePmf;

use crate::config::{read_instance_csv, CliError, Resolved};

pub const SCHEMA_VERSION: u32 = 1;

fn exact_error(kind: ExactError) -> CliError {
    match kind {
        ExactError::CapExceeded { .. }
        | ExactError::BeyondTable { .. }
        | ExactError::CircleTooFew { .. }
        | ExactError::ZeroPackages
        | ExactError::BadResidualWindow { .. } => CliError::config(kind),
    }
}

fn table_for(pmf: &BundlePmf, n: usize) -> Result<std::sync::Arc<GammaTable>, CliError> {
    GammaTable::cached(pmf, n.max(1)).map_err(exact_error)
}

pub struct ExactArgs {
    pub pmf: BundlePmf,
    pub pmf_spec: String,
    pub n: usize,
    pub lambda: f64,
    pub t: f64,
    pub circle: bool,
    pub sweep: Option<(f64, f64, usize)>,
}

/// `dsp exact`: closed-form expectations from the coefficient tables.
/// With `--sweep` prints CSV rows `(t, value)` instead of JSON.
pub fn cmd_exact(args: &ExactArgs) -> Result<Option<Value>, CliError> {
    if args.n > GAMMA_STABILITY_CAP {
        return Err(CliError::config(ExactError::CapExceeded {
            requested: args.n,
            cap: GAMMA_STABILITY_CAP,
        }));
    }
    let tab = table_for(&args.pmf, args.n)?;
    let value_at = |t: f64| -> Result<(f64, f64), CliError> {
        let q = ExpectationQuery { t, n: args.n, lambda: args.lambda };
        if args.circle {
            let c = tab.expected_pickups_circle(&q).map_err(exact_error)?;
            Ok((c, c))
        } else {
            let r = tab.expected_remaining_line(&q).map_err(exact_error)?;
            Ok((r, args.n as f64 - r))
        }
    };
    if let Some((t0, t1, steps)) = args.sweep {
        let mut out = String::from("t,value\n");
        for i in 0..steps {
            let t = t0 + (t1 - t0) * i as f64 / (steps - 1) as f64;
            let (first, second) = value_at(t)?;
            let value = if args.circle { first } else { second };
            out.push_str(&format!("{t},{value}\n"));
        }
        print!("{out}");
        return Ok(None);
    }
    let (first, second) = value_at(args.t)?;
    let config = json!({
        "pmf": args.pmf_spec,
        "n": args.n,
        "lambda": args.lambda,
        "t": args.t,
        "topology": if args.circle { "circle" } else { "line" },
    });
    let mut doc = json!({ "schema": SCHEMA_VERSION, "config": config });
    if args.circle {
        doc["C"] = json!(first);
    } else {
        doc["R"] = json!(first);
        doc["K"] = json!(second);
    }
    Ok(Some(doc))
}

pub struct AlphaArgs {
    pub pmf: BundlePmf,
    pub pmf_spec: String,
    pub lambda: f64,
    pub t: f64,
    pub quad_tol: f64,
    pub pinsky: Option<usize>,
}

/// `dsp alpha`: the limiting pickup proportion, or the deterministic-bundle
/// closed form with `--pinsky m`.
pub fn cmd_alpha(args: &AlphaArgs) -> Result<Option<Value>, CliError> {
    if let Some(m) = args.pinsky {
        let est = alpha_pinsky(m, args.quad_tol).map_err(CliError::numerical)?;
        return Ok(Some(json!({
            "schema": SCHEMA_VERSION,
            "config": { "pinsky": m, "quad_tol": args.quad_tol },
            "alpha": est.value,
            "quad_error_estimate": est.quad_error,
        })));
    }
    if args.lambda <= 0.0 {
        return Err(CliError::config("alpha requires --lambda > 0"));
    }
    let rows = (args.pmf.max_size() - 1).max(1);
    let tab = table_for(&args.pmf, rows)?;
    let est = alpha(&AlphaQuery::with_tol(args.t, args.lambda, args.quad_tol), &tab)
        .map_err(CliError::numerical)?;
    Ok(Some(json!({
        "schema": SCHEMA_VERSION,
        "config": {
            "pmf": args.pmf_spec,
            "lambda": args.lambda,
            "t": args.t,
            "quad_tol": args.quad_tol,
        },
        "alpha": est.value,
        "quad_error_estimate": est.quad_error,
    })))
}

pub struct SimulateArgs {
    pub pmf: BundlePmf,
    pub pmf_spec: String,
    pub n: usize,
    pub lambda: f64,
    pub horizon: f64,
    pub reps: usize,
    pub seed: u64,
}

/// `dsp simulate`: Monte Carlo estimate of the circle pickup count, with the
/// exact value (when the table covers `n`) and `n·alpha` for comparison.
pub fn cmd_simulate(args: &SimulateArgs) -> Result<Option<Value>, CliError> {
    let est = mc_expected_pickups(args.n, args.lambda, &args.pmf, args.horizon, args.reps, args.seed)
        .map_err(CliError::config)?;
    let exact = if args.n <= GAMMA_STABILITY_CAP && args.n >= args.pmf.max_size() {
        let tab = table_for(&args.pmf, args.n)?;
        Some(
            tab.expected_pickups_circle(&ExpectationQuery {
                t: args.horizon,
                n: args.n,
                lambda: args.lambda,
            })
            .map_err(exact_error)?,
        )
    } else {
        None
    };
    let alpha_times_n = if args.lambda > 0.0 && args.horizon > 0.0 {
        let rows = (args.pmf.max_size() - 1).max(1);
        let tab = table_for(&args.pmf, rows)?;
        let a = alpha(&AlphaQuery::new(args.horizon, args.lambda), &tab)
            .map_err(CliError::numerical)?;
        args.n as f64 * a.value
    } else {
        0.0
    };
    Ok(Some(json!({
        "schema": SCHEMA_VERSION,
        "config": {
            "pmf": args.pmf_spec,
            "n": args.n,
            "lambda": args.lambda,
            "T": args.horizon,
            "reps": args.reps,
            "seed": args.seed,
        },
        "mean": est.mean,
        "stderr": est.stderr,
        "exact": exact,
        "alpha_times_n": alpha_times_n,
    })))
}

pub struct RouteArgs {
    pub file: PathBuf,
    pub cvrp: bool,
    pub capacity: usize,
    pub metric: Metric,
    pub depot: [f64; 2],
}

/// `dsp route`: heuristic TSP or CVRP over an instance CSV.
pub fn cmd_route(args: &RouteArgs) -> Result<Option<Value>, CliError> {
    let points = read_instance_csv(&args.file)?;
    let config = json!({
        "file": args.file.display().to_string(),
        "mode": if args.cvrp { "cvrp" } else { "tsp" },
        "capacity": if args.cvrp { Some(args.capacity) } else { None },
        "metric": args.metric,
        "depot": args.depot,
        "points": points.len(),
    });
    if args.cvrp {
        let sol = cvrp_solve(&points, args.depot, args.capacity, args.metric)
            .map_err(CliError::config)?;
        Ok(Some(json!({
            "schema": SCHEMA_VERSION,
            "config": config,
            "length": sol.total_length,
            "routes": sol.routes,
        })))
    } else {
        let tour = tsp_tour(&points, args.metric).map_err(CliError::config)?;
        Ok(Some(json!({
            "schema": SCHEMA_VERSION,
            "config": config,
            "length": tour.length,
            "tour": tour.order,
        })))
    }
}

pub struct OptimizeArgs {
    pub instance: PathBuf,
    pub resolved: Resolved,
    pub depot: [f64; 2],
    pub metric: Metric,
    pub prices_out: Option<PathBuf>,
}

/// `dsp optimize`: optimal incentive rate for a concrete instance, with the
/// per-package price table written as CSV.
pub fn cmd_optimize(args: &OptimizeArgs) -> Result<Option<Value>, CliError> {
    let points = read_instance_csv(&args.instance)?;
    let inst = Instance::build(points, args.depot, args.metric).map_err(CliError::config)?;
    let summary = InstanceSummary::from_instance(&inst);
    let provider =
        CProvider::auto(&args.resolved.pmf, summary.n).map_err(CliError::numerical)?;
    let (z_star, cost_star) = optimize_incentive(
        &summary,
        &args.resolved.params,
        &args.resolved.model,
        &provider,
    )
    .map_err(CliError::numerical)?;
    let cvrp = cvrp_solve(
        inst.points(),
        args.depot,
        args.resolved.params.capacity,
        args.metric,
    )
    .map_err(CliError::config)?;
    let cost_van_only = van_only_cost(cvrp.total_length, summary.n, &args.resolved.params);
    let improvement_pct = (cost_van_only - cost_star) / cost_van_only;

    let prices_path = args
        .prices_out
        .clone()
        .unwrap_or_else(|| args.instance.with_extension("prices.csv"));
    let mean_bundle = args.resolved.pmf.mean();
    let mut csv_text = String::from("index,x,y,r,d,price,time_est\n");
    for loc in 1..=summary.n {
        let p = inst.ordered_point(loc);
        let price = package_price(
            inst.long_haul(loc),
            inst.local_dist(loc),
            &args.resolved.params,
            z_star,
            mean_bundle,
        )
        .map_err(CliError::numerical)?;
        let time_est = dsp_core::pricing::delivery_time(
            inst.long_haul(loc),
            inst.local_dist(loc),
            &args.resolved.params,
            mean_bundle,
        );
        csv_text.push_str(&format!(
            "{loc},{},{},{},{},{price},{time_est}\n",
            p[0],
            p[1],
            inst.long_haul(loc),
            inst.local_dist(loc)
        ));
    }
    write_file(&prices_path, &csv_text)?;

    Ok(Some(json!({
        "schema": SCHEMA_VERSION,
        "config": {
            "instance": args.instance.display().to_string(),
            "pmf": args.resolved.pmf_spec,
            "params": args.resolved.params,
            "lambda_model": args.resolved.model,
            "depot": args.depot,
            "metric": args.metric,
            "n": summary.n,
        },
        "z_star": z_star,
        "cost_star": cost_star,
        "cost_van_only": cost_van_only,
        "improvement_pct": improvement_pct,
        "per_package_prices": prices_path.display().to_string(),
    })))
}

pub struct CaseStudyArgs {
    pub scenario: String,
    pub n: usize,
    pub side: f64,
    pub scenario_seed: u64,
    pub n_seeds: usize,
    pub base_seed: u64,
    pub resolved: Resolved,
    pub depot: DepotPlacement,
    pub out: Option<PathBuf>,
    pub plot_data: Option<PathBuf>,
}

fn scenario_kind(name: &str) -> Result<ScenarioKind, CliError> {
    match name {
        "uniform" => Ok(ScenarioKind::UniformSquare),
        "clusters" => Ok(ScenarioKind::ThreeClusters),
        other => Err(CliError::config(format!(
            "unknown scenario `{other}` (expected uniform or clusters)"
        ))),
    }
}

/// `dsp case-study`: the full mixed-vs-van-only comparison, optionally
/// emitting plot data (objective curve, leftover route geometry, neighbor
/// density histogram).
pub fn cmd_case_study(args: &CaseStudyArgs) -> Result<Option<Value>, CliError> {
    let config = CaseStudyConfig {
        scenario: Scenario {
            kind: scenario_kind(&args.scenario)?,
            n: args.n,
            side: args.side,
            seed: args.scenario_seed,
        },
        params: args.resolved.params,
        model: args.resolved.model,
        pmf: args.resolved.pmf.clone(),
        depot: args.depot,
        metric: Metric::L1,
        n_seeds: args.n_seeds,
        base_seed: args.base_seed,
    };
    let report = run_case_study(&config).map_err(CliError::numerical)?;

    if let Some(dir) = &args.plot_data {
        std::fs::create_dir_all(dir)
            .map_err(|e| CliError::config(format!("cannot create {}: {e}", dir.display())))?;
        emit_plot_data(dir, &config, &report)?;
    }

    let doc = json!({
        "schema": SCHEMA_VERSION,
        "config": {
            "scenario": args.scenario,
            "n": args.n,
            "side": args.side,
            "scenario_seed": args.scenario_seed,
            "seeds": args.n_seeds,
            "base_seed": args.base_seed,
            "pmf": args.resolved.pmf_spec,
            "params": args.resolved.params,
            "lambda_model": args.resolved.model,
            "depot": args.depot,
        },
        "report": report,
    });
    if let Some(path) = &args.out {
        write_file(path, &format!("{}\n", serde_json::to_string_pretty(&doc).unwrap()))?;
    }
    Ok(Some(doc))
}

fn emit_plot_data(
    dir: &Path,
    config: &CaseStudyConfig,
    report: &dsp_core::scenarios::CaseStudyReport,
) -> Result<(), CliError> {
    let points = config.scenario.generate();
    let depot = config.depot.resolve(config.scenario.side);
    let inst = Instance::build(points, depot, config.metric).map_err(CliError::config)?;
    let summary = InstanceSummary::from_instance(&inst);
    let provider =
        CProvider::auto(&config.pmf, summary.n).map_err(CliError::numerical)?;

    // Objective-vs-z curve.
    let curve = objective_curve(&summary, &config.params, &config.model, &provider, 129)
        .map_err(CliError::numerical)?;
    let mut text = String::from("z,cost\n");
    for (z, c) in curve {
        text.push_str(&format!("{z},{c}\n"));
    }
    write_file(&dir.join("objective_curve.csv"), &text)?;

    // Leftover route geometry for the first pickup seed.
    let lambda_star = config.model.lambda(report.z_star);
    let trace = simulate_circle(
        summary.n,
        lambda_star,
        &config.pmf,
        config.params.horizon,
        report.seeds[0],
    );
    let leftover_pts = leftover_destinations(&trace, &inst).map_err(CliError::numerical)?;
    let sol = cvrp_solve(&leftover_pts, depot, config.params.capacity, config.metric)
        .map_err(CliError::config)?;
    let mut text = String::from("route,step,x,y\n");
    for (r, route) in sol.routes.iter().enumerate() {
        text.push_str(&format!("{r},0,{},{}\n", depot[0], depot[1]));
        for (s, &p) in route.iter().enumerate() {
            let pt = leftover_pts[p];
            text.push_str(&format!("{r},{},{},{}\n", s + 1, pt[0], pt[1]));
        }
        text.push_str(&format!("{r},{},{},{}\n", route.len() + 1, depot[0], depot[1]));
    }
    write_file(&dir.join("leftover_routes.csv"), &text)?;

    // Neighbor-distance histogram of the instance tour.
    let hist = neighbor_density(inst.tour(), inst.points(), config.metric, 40)
        .map_err(CliError::config)?;
    let mut text = String::from("bin_lo,bin_hi,density\n");
    for (i, d) in hist.density.iter().enumerate() {
        text.push_str(&format!("{},{},{d}\n", hist.bin_edges[i], hist.bin_edges[i + 1]));
    }
    write_file(&dir.join("neighbor_density.csv"), &text)?;
    Ok(())
}

pub struct TspDensityArgs {
    pub scenario: String,
    pub n: usize,
    pub seeds: usize,
    pub bins: usize,
    pub base_seed: u64,
    pub metric: Metric,
    pub out: Option<PathBuf>,
}

/// `dsp tsp-density`: pooled neighbor-distance statistics over many
/// independently sampled instances.
pub fn cmd_tsp_density(args: &TspDensityArgs) -> Result<Option<Value>, CliError> {
    use rayon::prelude::*;
    if args.seeds == 0 || args.n < 2 || args.bins == 0 {
        return Err(CliError::config("need seeds >= 1, n >= 2, bins >= 1"));
    }
    let kind = scenario_kind(&args.scenario)?;
    let per_seed: Result<Vec<Vec<f64>>, CliError> = (0..args.seeds as u64)
        .into_par_iter()
        .map(|s| {
            let seed = derive_seed(args.base_seed, s);
            let points = match kind {
                ScenarioKind::UniformSquare => {
                    dsp_core::scenarios::gen_uniform_square(args.n, 5.0, seed)
                }
                ScenarioKind::ThreeClusters => three_cluster_points(args.n, seed),
                ScenarioKind::Custom(_) => unreachable!(),
            };
            let tour = tsp_tour(&points, args.metric).map_err(CliError::config)?;
            let n = tour.order.len();
            Ok((0..n)
                .map(|i| {
                    args.metric.dist(
                        points[tour.order[i]],
                        points[tour.order[(i + 1) % n]],
                    )
                })
                .collect())
        })
        .collect();
    let pooled: Vec<f64> = per_seed?.into_iter().flatten().collect();
    let mean = pooled.iter().sum::<f64>() / pooled.len() as f64;
    let var = pooled.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / pooled.len() as f64;
    let max = pooled.iter().cloned().fold(0.0_f64, f64::max).max(f64::MIN_POSITIVE);
    let width = max / args.bins as f64;
    let mut counts = vec![0usize; args.bins];
    for &d in &pooled {
        counts[((d / width) as usize).min(args.bins - 1)] += 1;
    }
    if let Some(path) = &args.out {
        let mut text = String::from("bin_lo,bin_hi,density\n");
        for (i, &c) in counts.iter().enumerate() {
            let density = c as f64 / (pooled.len() as f64 * width);
            text.push_str(&format!("{},{},{density}\n", i as f64 * width, (i + 1) as f64 * width));
        }
        write_file(path, &text)?;
    }
    Ok(Some(json!({
        "schema": SCHEMA_VERSION,
        "config": {
            "scenario": args.scenario,
            "n": args.n,
            "seeds": args.seeds,
            "bins": args.bins,
            "base_seed": args.base_seed,
            "metric": args.metric,
        },
        "mean": mean,
        "std_dev": var.sqrt(),
        "edges": pooled.len(),
    })))
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    let mut file = std::fs::File::create(path)
        .map_err(|e| CliError::config(format!("cannot write {}: {e}", path.display())))?;
    file.write_all(text.as_bytes())
        .map_err(|e| CliError::config(format!("cannot write {}: {e}", path.display())))
}
