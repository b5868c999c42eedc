//! End-to-end CLI tests: output values, exit codes, config handling, and
//! the byte-identical determinism contract.

use std::io::Write;
use std::process::{Command, Output};

fn dsp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dsp"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json_of(out: &Output) -> serde_json::Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn exact_line_value_matches_closed_form() {
    let out = dsp(&["exact", "--pmf", "det:2", "--n", "3", "--lambda", "1", "--t", "1"]);
    let doc = json_of(&out);
    assert_eq!(doc["schema"], 1);
    let r = doc["R"].as_f64().unwrap();
    assert!((r - (1.0 + 2.0 * (-2.0_f64).exp())).abs() < 1e-9, "R = {r}");
    assert_eq!(doc["config"]["pmf"], "det:2");
}

#[test]
fn exact_circle_and_sweep() {
    let out = dsp(&[
        "exact", "--pmf", "det:2", "--n", "2", "--lambda", "1", "--t", "0.5", "--topology",
        "circle",
    ]);
    let doc = json_of(&out);
    let c = doc["C"].as_f64().unwrap();
    assert!((c - 2.0 * (1.0 - (-1.0_f64).exp())).abs() < 1e-9);

    let out = dsp(&[
        "exact", "--pmf", "det:2", "--n", "5", "--lambda", "1", "--topology", "line", "--sweep",
        "0:1:3",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.trim().lines().collect();
    assert_eq!(lines[0], "t,value");
    assert_eq!(lines.len(), 4);
    assert!(lines[1].starts_with("0,0"));
}

#[test]
fn alpha_reaches_page_constant() {
    let out = dsp(&["alpha", "--pmf", "det:2", "--lambda", "1", "--t", "1e9"]);
    let doc = json_of(&out);
    let a = doc["alpha"].as_f64().unwrap();
    assert!((a - 0.864_664_716_763_387).abs() < 1e-5, "alpha = {a}");
    assert!(doc["quad_error_estimate"].as_f64().unwrap() < 1e-8);
}

#[test]
fn alpha_pinsky_mode() {
    let out = dsp(&["alpha", "--pinsky", "2"]);
    let doc = json_of(&out);
    let a = doc["alpha"].as_f64().unwrap();
    assert!((a - (1.0 - (-2.0_f64).exp())).abs() < 1e-8);
}

#[test]
fn simulate_is_byte_deterministic_and_consistent() {
    let args = [
        "simulate", "--pmf", "uniform:1..3", "--n", "10", "--lambda", "1", "--T", "1", "--reps",
        "20000", "--seed", "42",
    ];
    let a = dsp(&args);
    let b = dsp(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout, "identical invocations must emit identical bytes");
    let doc = json_of(&a);
    let mean = doc["mean"].as_f64().unwrap();
    let stderr = doc["stderr"].as_f64().unwrap();
    let exact = doc["exact"].as_f64().unwrap();
    assert!((mean - exact).abs() <= 3.0 * stderr, "mc {mean} vs exact {exact}");
    assert!(doc["alpha_times_n"].as_f64().unwrap() > 0.0);
}

#[test]
fn seed_falls_back_to_environment() {
    let base = [
        "simulate", "--pmf", "det:2", "--n", "6", "--lambda", "1", "--T", "1", "--reps", "500",
    ];
    let via_env = Command::new(env!("CARGO_BIN_EXE_dsp"))
        .args(base)
        .env("DSP_SEED", "77")
        .output()
        .unwrap();
    let via_flag = dsp(&[&base[..], &["--seed", "77"]].concat());
    assert_eq!(via_env.stdout, via_flag.stdout);
}

#[test]
fn route_commands_work() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("inst.csv");
    std::fs::write(&path, "x,y\n0,0\n1,0\n1,1\n0,1\n").unwrap();
    let p = path.to_str().unwrap();

    let out = dsp(&["route", "--tsp", p]);
    let doc = json_of(&out);
    assert!((doc["length"].as_f64().unwrap() - 4.0).abs() < 1e-9);

    let out = dsp(&["route", "--cvrp", "--capacity", "4", "--depot", "0.5,0.5", p]);
    let doc = json_of(&out);
    assert_eq!(doc["routes"].as_array().unwrap().len(), 1);
}

#[test]
fn optimize_emits_prices_and_sane_optimum() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("inst.csv");
    let mut f = std::fs::File::create(&path).unwrap();
    writeln!(f, "x,y").unwrap();
    // Deterministic pseudo-grid of 144 destinations on the square.
    for i in 0..12 {
        for j in 0..12 {
            writeln!(f, "{},{}", 0.2 + i as f64 * 0.42, 0.2 + j as f64 * 0.42).unwrap();
        }
    }
    drop(f);
    let prices = dir.path().join("prices.csv");
    let out = dsp(&[
        "optimize",
        "--instance",
        path.to_str().unwrap(),
        "--depot",
        "2.5,2.5",
        "--prices-out",
        prices.to_str().unwrap(),
    ]);
    let doc = json_of(&out);
    let z = doc["z_star"].as_f64().unwrap();
    assert!((-16.49..=48.71).contains(&z));
    assert!(doc["cost_star"].as_f64().unwrap() > 0.0);
    let text = std::fs::read_to_string(&prices).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "index,x,y,r,d,price,time_est");
    assert_eq!(lines.count(), 144);
}

#[test]
fn params_file_overrides_and_rejects_unknown_keys() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("params.toml");
    std::fs::write(&good, "h_p = 10.0\npmf = \"det:2\"\n").unwrap();
    let inst = dir.path().join("inst.csv");
    std::fs::write(&inst, "x,y\n1,1\n2,2\n3,1\n1,3\n").unwrap();
    let out = dsp(&[
        "optimize",
        "--instance",
        inst.to_str().unwrap(),
        "--params",
        good.to_str().unwrap(),
    ]);
    let doc = json_of(&out);
    assert_eq!(doc["config"]["params"]["h_p"], 10.0);
    assert_eq!(doc["config"]["pmf"], "det:2");

    // CLI flag beats the file.
    let out = dsp(&[
        "optimize",
        "--instance",
        inst.to_str().unwrap(),
        "--params",
        good.to_str().unwrap(),
        "--pmf",
        "det:3",
    ]);
    let doc = json_of(&out);
    assert_eq!(doc["config"]["pmf"], "det:3");

    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "h_p = 10.0\nnot_a_key = 1\n").unwrap();
    let out = dsp(&[
        "optimize",
        "--instance",
        inst.to_str().unwrap(),
        "--params",
        bad.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not_a_key"));
}

#[test]
fn config_errors_exit_2() {
    // Missing required flag.
    let out = dsp(&["exact", "--pmf", "det:2", "--lambda", "1", "--t", "1"]);
    assert_eq!(out.status.code(), Some(2));
    // Bad pmf spec.
    let out = dsp(&["exact", "--pmf", "nope", "--n", "3", "--lambda", "1", "--t", "1"]);
    assert_eq!(out.status.code(), Some(2));
    // Circle below the max bundle size.
    let out = dsp(&[
        "exact", "--pmf", "det:3", "--n", "2", "--lambda", "1", "--t", "1", "--topology",
        "circle",
    ]);
    assert_eq!(out.status.code(), Some(2));
    // Malformed instance CSV (bad header).
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    std::fs::write(&path, "a,b\n1,2\n").unwrap();
    let out = dsp(&["route", "--tsp", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("expected header"));
}

#[test]
fn case_study_small_run_with_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let report_path = dir.path().join("report.json");
    let plots = dir.path().join("plots");
    let out = dsp(&[
        "case-study",
        "--scenario",
        "uniform",
        "--n",
        "150",
        "--seeds",
        "2",
        "--seed",
        "9",
        "--out",
        report_path.to_str().unwrap(),
        "--plot-data",
        plots.to_str().unwrap(),
    ]);
    let doc = json_of(&out);
    let report = &doc["report"];
    assert_eq!(report["n"], 150);
    let improvement = report["improvement_pct_mean"].as_f64().unwrap();
    let van = report["cost_van_only"].as_f64().unwrap();
    let mixed = report["cost_mixed_mean"].as_f64().unwrap();
    assert!((improvement - (van - mixed) / van).abs() < 1e-9);
    // File copy matches stdout, and plot data exists.
    let file_doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report_path).unwrap()).unwrap();
    assert_eq!(file_doc, doc);
    for name in ["objective_curve.csv", "leftover_routes.csv", "neighbor_density.csv"] {
        assert!(plots.join(name).exists(), "{name} missing");
    }
}

#[test]
fn tsp_density_small_run() {
    let out = dsp(&[
        "tsp-density", "--scenario", "uniform", "--n", "200", "--seeds", "3", "--bins", "20",
    ]);
    let doc = json_of(&out);
    let mean = doc["mean"].as_f64().unwrap();
    assert!(mean > 0.0 && mean < 1.0, "mean {mean}");
    assert_eq!(doc["edges"], 600);
}
