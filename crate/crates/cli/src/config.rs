//! Config-file and input-file loading: cost-parameter overrides (TOML or
//! JSON), instance CSVs, and small argument parsers shared by subcommands.

use std::fmt;
use std::path::Path;

use serde::Deserialize;

use dsp_core::pricing::{CostParams, IncentiveModel};
use dsp_core::routing::Metric;
use dsp_core::scenarios::{default_params, DepotPlacement};
use dsp_core::BundlePmf;

/// Errors split by exit code: config problems exit 2, numerical failures 1.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 1,
        }
    }

    pub fn config(msg: impl fmt::Display) -> Self {
        CliError::Config(msg.to_string())
    }

    pub fn numerical(msg: impl fmt::Display) -> Self {
        CliError::Numerical(msg.to_string())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

/// Partial override file for the calibrated defaults. Unknown keys are
/// rejected so typos fail loudly.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsFile {
    pub zeta_p: Option<f64>,
    pub h_p: Option<f64>,
    pub v_p: Option<f64>,
    pub tau_p: Option<f64>,
    pub zeta_v: Option<f64>,
    pub h_v: Option<f64>,
    pub v_v: Option<f64>,
    pub tau_v: Option<f64>,
    pub capacity: Option<usize>,
    pub area: Option<f64>,
    pub beta_vrp: Option<f64>,
    pub horizon: Option<f64>,
    pub lambda_intercept: Option<f64>,
    pub lambda_slope: Option<f64>,
    /// Bundle-size pmf in the mini-language (`det:m`, `uniform:a..b`,
    /// `tpois:mean,max`, `list:p1,p2,...`).
    pub pmf: Option<String>,
}

/// Fully resolved run parameters: defaults, overlaid by a params file,
/// overlaid by explicit CLI flags.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub params: CostParams,
    pub model: IncentiveModel,
    pub pmf: BundlePmf,
    pub pmf_spec: String,
}

pub fn resolve_params(
    file: Option<&Path>,
    pmf_flag: Option<&str>,
) -> Result<Resolved, CliError> {
    let (mut params, mut model, mut pmf) = default_params();
    let mut pmf_spec = "tpois:10,20".to_string();
    if let Some(path) = file {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
        let overrides: ParamsFile = match path.extension().and_then(|e| e.to_str()) {
            Some("json") => serde_json::from_str(&text)
                .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?,
            _ => toml::from_str(&text)
                .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?,
        };
        macro_rules! overlay {
            ($($field:ident),*) => {
                $(if let Some(v) = overrides.$field { params.$field = v; })*
            };
        }
        overlay!(zeta_p, h_p, v_p, tau_p, zeta_v, h_v, v_v, tau_v, capacity, area, beta_vrp, horizon);
        if let Some(v) = overrides.lambda_intercept {
            model.intercept = v;
        }
        if let Some(v) = overrides.lambda_slope {
            if v < 0.0 {
                return Err(CliError::config("lambda_slope must be nonnegative"));
            }
            model.slope = v;
        }
        if let Some(spec) = overrides.pmf {
            pmf = BundlePmf::parse_spec(&spec).map_err(CliError::config)?;
            pmf_spec = spec;
        }
    }
    if let Some(spec) = pmf_flag {
        pmf = BundlePmf::parse_spec(spec).map_err(CliError::config)?;
        pmf_spec = spec.to_string();
    }
    params.validate().map_err(CliError::config)?;
    Ok(Resolved { params, model, pmf, pmf_spec })
}

/// Reads an instance CSV with header `x,y`.
pub fn read_instance_csv(path: &Path) -> Result<Vec<[f64; 2]>, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
    {
        let headers = reader
            .headers()
            .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        if headers.len() < 2 || &headers[0] != "x" || &headers[1] != "y" {
            return Err(CliError::config(format!(
                "{}: expected header `x,y`, found `{}`",
                path.display(),
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
    }
    let mut points = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        let parse = |idx: usize| -> Result<f64, CliError> {
            record
                .get(idx)
                .ok_or_else(|| {
                    CliError::config(format!(
                        "{}: row {}: missing field {}",
                        path.display(),
                        line + 2,
                        idx
                    ))
                })?
                .parse::<f64>()
                .map_err(|e| {
                    CliError::config(format!("{}: row {}: {e}", path.display(), line + 2))
                })
        };
        points.push([parse(0)?, parse(1)?]);
    }
    if points.is_empty() {
        return Err(CliError::config(format!("{}: no data rows", path.display())));
    }
    Ok(points)
}

/// Parses `x,y` coordinates (e.g. for `--depot`).
pub fn parse_point(s: &str) -> Result<[f64; 2], String> {
    let (x, y) = s
        .split_once(',')
        .ok_or_else(|| format!("expected `x,y`, got `{s}`"))?;
    let x: f64 = x.trim().parse().map_err(|e| format!("bad x: {e}"))?;
    let y: f64 = y.trim().parse().map_err(|e| format!("bad y: {e}"))?;
    Ok([x, y])
}

/// Parses a depot placement: `center`, `corner`, or `x,y`.
pub fn parse_depot(s: &str) -> Result<DepotPlacement, String> {
    match s {
        "center" => Ok(DepotPlacement::Center),
        "corner" => Ok(DepotPlacement::Corner),
        other => parse_point(other).map(DepotPlacement::Custom),
    }
}

/// Parses a sweep spec `t0:t1:steps`.
pub fn parse_sweep(s: &str) -> Result<(f64, f64, usize), String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("expected `t0:t1:steps`, got `{s}`"));
    }
    let t0: f64 = parts[0].parse().map_err(|e| format!("bad t0: {e}"))?;
    let t1: f64 = parts[1].parse().map_err(|e| format!("bad t1: {e}"))?;
    let steps: usize = parts[2].parse().map_err(|e| format!("bad steps: {e}"))?;
    if steps < 2 || t1 <= t0 || t0 < 0.0 {
        return Err("need t1 > t0 >= 0 and steps >= 2".to_string());
    }
    Ok((t0, t1, steps))
}

pub fn parse_metric(s: &str) -> Result<Metric, String> {
    match s.to_ascii_lowercase().as_str() {
        "l1" => Ok(Metric::L1),
        "l2" => Ok(Metric::L2),
        other => Err(format!("unknown metric `{other}` (expected l1 or l2)")),
    }
}

/// Seed fallback: explicit flag, then DSP_SEED, then 0.
pub fn resolve_seed(flag: Option<u64>) -> Result<u64, CliError> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match std::env::var("DSP_SEED") {
        Ok(v) => v
            .parse::<u64>()
            .map_err(|e| CliError::config(format!("DSP_SEED: {e}"))),
        Err(_) => Ok(0),
    }
}
