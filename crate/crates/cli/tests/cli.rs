//! End-to-end checks of the CLI surface: exit codes, file schemas, and
//! cross-command consistency.

use std::path::{Path, PathBuf};
use std::process::Command;

fn ssd_bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ssd"))
}

fn write_json(dir: &Path, name: &str, value: serde_json::Value) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string_pretty(&value).unwrap()).unwrap();
    path
}

fn small_config(output_dir: &str) -> serde_json::Value {
    serde_json::json!({
        "benchmark": {"kind": "nesterov-worst", "dim": 25, "r": 10, "lambda": 8.0},
        "schemes": ["haar"],
        "ells": [3],
        "step_policies": [{"policy": "armijo"}],
        "replicates": 4,
        "base_seed": 7,
        "max_iterations": 4000,
        "max_fevals": 12000,
        "target_relative_error": 0.1,
        "output_dir": output_dir
    })
}

#[test]
fn missing_config_is_an_input_error() {
    let status = ssd_bin().args(["run", "/nonexistent/config.json"]).status().unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn malformed_json_is_an_input_error() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("bad.json");
    std::fs::write(&path, "{not json").unwrap();
    let status = ssd_bin().arg("run").arg(&path).status().unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn empty_solver_grid_is_a_mismatch() {
    let tmp = tempfile::tempdir().unwrap();
    let mut config = small_config("out");
    config["schemes"] = serde_json::json!([]);
    let path = write_json(tmp.path(), "config.json", config);
    let out = ssd_bin().arg("run").arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("empty solver grid"));
}

#[test]
fn oversized_subspace_is_a_mismatch() {
    let tmp = tempfile::tempdir().unwrap();
    let mut config = small_config("out");
    config["ells"] = serde_json::json!([40]);
    let path = write_json(tmp.path(), "config.json", config);
    assert_eq!(ssd_bin().arg("run").arg(&path).status().unwrap().code(), Some(3));
}

#[test]
fn bad_benchmark_parameters_are_a_mismatch() {
    let tmp = tempfile::tempdir().unwrap();
    let mut config = small_config("out");
    config["benchmark"] = serde_json::json!({"kind": "nesterov-worst", "dim": 10, "r": 10, "lambda": 8.0});
    let path = write_json(tmp.path(), "config.json", config);
    assert_eq!(ssd_bin().arg("run").arg(&path).status().unwrap().code(), Some(3));
}

#[test]
fn invalid_thread_cap_is_an_input_error() {
    let tmp = tempfile::tempdir().unwrap();
    let path = write_json(tmp.path(), "config.json", small_config("out"));
    let status = ssd_bin()
        .arg("run")
        .arg(&path)
        .env("SSD_THREADS", "0")
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn run_emits_documented_trace_schema_and_summary() {
    let tmp = tempfile::tempdir().unwrap();
    let path = write_json(tmp.path(), "config.json", small_config("results"));
    let out = ssd_bin().arg("run").arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));

    // Output dir resolves relative to the config file.
    let out_dir = tmp.path().join("results");
    let trace = out_dir.join("trace_ssd-haar-l3-armijo_r0000.csv");
    let content = std::fs::read_to_string(&trace).unwrap();
    let mut lines = content.lines();
    assert_eq!(
        lines.next().unwrap(),
        "run_id,iteration,fevals,f_value,rel_error,step_size,scheme,ell,seed,stream_id"
    );
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(first[0], "0");
    assert_eq!(first[1], "0");
    // Relative error at the zero start is exactly 1.
    assert_eq!(first[4].parse::<f64>().unwrap(), 1.0);
    assert_eq!(first[6], "haar");
    assert_eq!(first[7], "3");
    assert_eq!(first[8], "7");
    assert_eq!(first[9], "0");

    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("summary.json")).unwrap())
            .unwrap();
    assert_eq!(summary["replicates"], 4);
    assert_eq!(summary["solvers"][0]["solver"], "ssd-haar-l3-armijo");
    assert_eq!(summary["benchmark"]["dim"], 25);
    let grid = summary["solvers"][0]["feval_grid"].as_array().unwrap();
    let p10 = summary["solvers"][0]["p10"].as_array().unwrap();
    let p90 = summary["solvers"][0]["p90"].as_array().unwrap();
    assert_eq!(grid.len(), p10.len());
    assert_eq!(grid.len(), p90.len());
    for (lo, hi) in p10.iter().zip(p90) {
        assert!(lo.as_f64().unwrap() <= hi.as_f64().unwrap());
    }
}

#[test]
fn summary_reproduces_from_parsed_traces() {
    let tmp = tempfile::tempdir().unwrap();
    let path = write_json(tmp.path(), "config.json", small_config("roundtrip"));
    assert!(ssd_bin().arg("run").arg(&path).status().unwrap().success());

    let written = std::fs::read(tmp.path().join("roundtrip/summary.json")).unwrap();
    let reaggregated = ssd_cli::experiment::aggregate_only(&path).unwrap();
    assert_eq!(written, reaggregated, "write/parse/re-aggregate changed the summary");
}

#[test]
fn profile_builds_monotone_curves_with_baseline() {
    let tmp = tempfile::tempdir().unwrap();
    let path = write_json(tmp.path(), "config.json", small_config("prof"));
    assert!(ssd_bin().arg("run").arg(&path).status().unwrap().success());

    let dir = tmp.path().join("prof");
    let out = ssd_bin()
        .arg("profile")
        .arg(&dir)
        .args(["--threshold", "0.9", "--baseline", "bfgs=1234"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));

    let content = std::fs::read_to_string(dir.join("profile.csv")).unwrap();
    let mut lines = content.lines();
    assert_eq!(lines.next().unwrap(), "solver,tau,fraction");
    let mut last: Option<(String, f64, f64)> = None;
    let mut saw_baseline = false;
    for line in lines {
        let fields: Vec<&str> = line.split(',').collect();
        let solver = fields[0].to_string();
        let tau: f64 = fields[1].parse().unwrap();
        let fraction: f64 = fields[2].parse().unwrap();
        assert!(tau >= 1.0);
        assert!((0.0..=1.0).contains(&fraction));
        if solver == "bfgs" {
            saw_baseline = true;
            assert_eq!(fraction, 1.0);
        }
        if let Some((prev_solver, prev_tau, prev_fraction)) = last {
            if prev_solver == solver {
                assert!(tau >= prev_tau);
                assert!(fraction >= prev_fraction);
            }
        }
        last = Some((solver, tau, fraction));
    }
    assert!(saw_baseline, "baseline entry missing from the profile");
}

#[test]
fn profile_of_empty_directory_is_an_input_error() {
    let tmp = tempfile::tempdir().unwrap();
    let status = ssd_bin().arg("profile").arg(tmp.path()).status().unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn theory_reports_and_grid_are_consistent() {
    let tmp = tempfile::tempdir().unwrap();
    let params = write_json(
        tmp.path(),
        "params.json",
        serde_json::json!({
            "d": 100, "ell": 10, "eps": 0.1,
            "gamma": 1.0, "lambda": 10.0,
            "horizon": 30, "radius": 2.0
        }),
    );
    let out = ssd_bin().arg("theory").arg(&params).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));

    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("theory_report.json")).unwrap())
            .unwrap();
    let delta = report["delta"].as_f64().unwrap();
    assert!(delta > 0.0 && delta < 1.0);
    assert_eq!(report["omega"].as_f64().unwrap(), 1.0 - 10.0 * 1.0 / (100.0 * 10.0));
    assert_eq!(report["tail"].as_array().unwrap().len(), 30);
    assert!(report["bounds"]["convex"].is_array());

    // Grid: delta is monotone in l at fixed d, and the l = d cells are 1.
    let grid = std::fs::read_to_string(tmp.path().join("embedding_grid.csv")).unwrap();
    let mut lines = grid.lines();
    assert_eq!(lines.next().unwrap(), "d,ell,eps,delta");
    let mut prev: Option<(u64, f64)> = None;
    let mut full_cells = 0;
    for line in lines {
        let fields: Vec<&str> = line.split(',').collect();
        let d: u64 = fields[0].parse().unwrap();
        let ell: u64 = fields[1].parse().unwrap();
        let delta: f64 = fields[3].parse().unwrap();
        if ell == d {
            assert_eq!(delta, 1.0, "l = d row must be exactly 1");
            full_cells += 1;
        }
        if let Some((prev_d, prev_delta)) = prev {
            if prev_d == d {
                assert!(delta >= prev_delta - 1e-12, "delta not monotone in l");
            }
        }
        prev = Some((d, delta));
    }
    assert!(full_cells >= 5);
}

#[test]
fn theory_rejects_domain_errors_with_exit_two() {
    let tmp = tempfile::tempdir().unwrap();
    let params = write_json(
        tmp.path(),
        "params.json",
        serde_json::json!({
            "d": 10, "ell": 20, "eps": 0.1,
            "gamma": 1.0, "lambda": 10.0, "horizon": 10
        }),
    );
    assert_eq!(ssd_bin().arg("theory").arg(&params).status().unwrap().code(), Some(2));
}

#[test]
fn validate_sampler_matches_the_theory_value() {
    let out = ssd_bin()
        .args([
            "validate-sampler",
            "--scheme",
            "haar",
            "--d",
            "50",
            "--ell",
            "5",
            "--eps",
            "0.3",
            "--draws",
            "20000",
            "--seed",
            "11",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let sigmas = report["delta_deviation_sigmas"].as_f64().unwrap();
    assert!(sigmas <= 4.0, "Monte-Carlo rate {sigmas} se away from the closed form");
    assert!(report["max_structural_residual"].as_f64().unwrap() <= 1e-10);
    let mse = report["projection_mse"].as_f64().unwrap();
    let expect = report["expected_projection_mse"].as_f64().unwrap();
    assert!((mse - expect).abs() <= 0.05 * expect);
}

#[test]
fn validate_sampler_rejects_bad_arguments() {
    let status = ssd_bin()
        .args([
            "validate-sampler",
            "--scheme",
            "haar",
            "--d",
            "5",
            "--ell",
            "9",
            "--eps",
            "0.3",
            "--draws",
            "10",
        ])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));

    let status = ssd_bin()
        .args([
            "validate-sampler",
            "--scheme",
            "unknown",
            "--d",
            "5",
            "--ell",
            "2",
            "--eps",
            "0.3",
            "--draws",
            "10",
        ])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn gaussian_iid_scheme_is_available_as_a_baseline() {
    let tmp = tempfile::tempdir().unwrap();
    let mut config = small_config("iid");
    config["schemes"] = serde_json::json!(["gaussian-iid"]);
    config["target_relative_error"] = serde_json::Value::Null;
    config["max_iterations"] = serde_json::json!(50);
    let path = write_json(tmp.path(), "config.json", config);
    let out = ssd_bin().arg("run").arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(tmp
        .path()
        .join("iid/trace_ssd-gaussian-iid-l3-armijo_r0000.csv")
        .exists());
}
