use std::path::PathBuf;
use std::process::Command;

use sminlab::experiments::ExperimentReport;
use sminlab_cli::{render_report, render_svg, run, Format};

fn rmt(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("rmt").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn temp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("rmt-tests-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn lcd_of_basis_vector() {
    let (code, out, _) = rmt(&["lcd", "--vector", "1,0,0", "--r", "0.1", "--alpha", "10", "--tmax", "5"]);
    assert_eq!(code, 0);
    let v: f64 = out.trim().parse().unwrap();
    assert!((v - 1.0 / 1.1).abs() < 1e-6, "{v}");
}

#[test]
fn lcd_formats_and_modes_agree() {
    let args = ["lcd", "--vector", "0.6,-0.8", "--alpha", "auto", "--tmax", "20"];
    let (_, fast, _) = rmt(&args);
    let mut oracle_args = args.to_vec();
    oracle_args.extend(["--mode", "oracle"]);
    let (_, oracle, _) = rmt(&oracle_args);
    let (f, o): (f64, f64) = (fast.trim().parse().unwrap(), oracle.trim().parse().unwrap());
    assert!((f - o).abs() < 1e-6);
    let mut json_args = args.to_vec();
    json_args.extend(["--format", "json"]);
    let (code, json, _) = rmt(&json_args);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v["schema_version"], 1);
}

#[test]
fn verify_smoke_produces_json() {
    let (code, out, _) = rmt(&["verify", "--dist", "gaussian", "--n", "50", "--trials", "5", "--eps", "0.2", "--seed", "1"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["cells"].as_array().unwrap().len(), 1);
    assert!(v["timestamp"].is_u64());
}

#[test]
fn unknown_flag_is_usage_error() {
    let (code, out, err) = rmt(&["verify", "--bogus-flag"]);
    assert_eq!(code, 1);
    assert!(out.is_empty());
    assert!(err.contains("Usage"));
    assert_eq!(rmt(&[]).0, 1);
    assert_eq!(rmt(&["frobnicate"]).0, 1);
    assert_eq!(rmt(&["verify", "--eps", ""]).0, 1);
    assert_eq!(rmt(&["verify", "--eps", "1.5"]).0, 1);
    assert_eq!(rmt(&["lcd", "--vector", "1,0", "--alpha", "-2"]).0, 1);
    assert_eq!(rmt(&["lcd"]).0, 1);
}

#[test]
fn help_and_version_succeed() {
    let (code, out, _) = rmt(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("verify") && out.contains("smallball"));
    assert_eq!(rmt(&["--version"]).0, 0);
}

#[test]
fn runtime_failure_exit_code() {
    assert_eq!(rmt(&["lcd", "--vector", "0,0"]).0, 2);
    assert_eq!(rmt(&["nets", "--n", "40", "--cap", "10"]).0, 2);
    assert_eq!(rmt(&["report", "--input", "/nonexistent/report.json"]).0, 2);
}

#[test]
fn constant_above_limit_fails_check() {
    let args = ["verify", "--n", "2", "--trials", "60", "--eps", "0.95", "--no-timestamp"];
    let (code, out, _) = rmt(&args);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert!(v["c_hat"].as_f64().unwrap() > 0.0);
    let mut strict = args.to_vec();
    strict.extend(["--max-c", "0"]);
    let (code, strict_out, err) = rmt(&strict);
    assert_eq!(code, 3);
    assert_eq!(strict_out, out);
    assert!(err.contains("C_hat"));
}

#[test]
fn outputs_are_reproducible() {
    let base = ["verify", "--dist", "gaussian,pareto:2.5", "--n", "8,16", "--trials", "12", "--no-timestamp"];
    let (_, a, _) = rmt(&base);
    let (_, b, _) = rmt(&base);
    assert_eq!(a, b);
    let mut threaded = base.to_vec();
    threaded.extend(["--workers", "3"]);
    assert_eq!(rmt(&threaded).1, a);
    let mut seeded = base.to_vec();
    seeded.extend(["--seed", "99"]);
    assert_ne!(rmt(&seeded).1, a);

    for cmd in [
        vec!["smallball", "--random-dim", "12", "--samples", "10000"],
        vec!["witness", "--n", "6"],
        vec!["probe", "--n", "12", "--probes", "1000"],
        vec!["nets", "--n", "5", "--delta", "0.4", "--rho", "0.6"],
    ] {
        let first = rmt(&cmd);
        assert_eq!(first.0, 0, "{cmd:?}: {}", first.2);
        assert_eq!(first, rmt(&cmd), "{cmd:?}");
    }
}

#[test]
fn records_file_has_declared_columns() {
    let path = temp("records.csv");
    let p = path.to_str().unwrap();
    let (code, _, _) = rmt(&["verify", "--n", "6", "--trials", "3", "--records", p, "--no-timestamp"]);
    assert_eq!(code, 0);
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "dist,n,trial_index,seed,s_n,witness_upper,norm_x,b2,degenerate,runtime_ms");
    assert_eq!(lines.count(), 3);
}

#[test]
fn config_file_supplies_flags() {
    let cfg = temp("sweep.ini");
    std::fs::write(&cfg, "# sweep\ndist = rademacher\nn = 6\ntrials = 4\neps = 0.3\nno_timestamp = true\n").unwrap();
    let c = cfg.to_str().unwrap();
    let (code, out, _) = rmt(&["verify", "--config", c]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["config"]["distributions"][0], "rademacher");
    assert_eq!(v["config"]["trials"], 4);
    assert!(v.get("timestamp").is_none());
    // command-line flags win over the file
    let (_, out, _) = rmt(&["verify", "--config", c, "--trials", "2"]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["config"]["trials"], 2);

    std::fs::write(&cfg, "bogus_key = 1\n").unwrap();
    assert_eq!(rmt(&["verify", "--config", c]).0, 1);
}

#[test]
fn witness_reads_matrix_file() {
    let path = temp("m.csv");
    std::fs::write(&path, "# 2 2\n2,0\n0,1\n").unwrap();
    let (code, out, _) = rmt(&["witness", "--matrix", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["norm_x"], 2.0);
    assert_eq!(v["upper_bound"], 2.0);
    assert_eq!(v["degenerate"], false);

    std::fs::write(&path, "# 2 2\n1,2\n2,4\n").unwrap();
    let (code, out, _) = rmt(&["witness", "--matrix", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(out.contains("\"degenerate\": true"));
}

#[test]
fn smallball_flat_vector_concentrates() {
    let (code, out, _) = rmt(&["smallball", "--flat-dim", "100", "--eps", "0.01", "--samples", "50000"]);
    assert_eq!(code, 0);
    let mut lines = out.lines();
    assert_eq!(lines.next().unwrap(), "epsilon,empirical,lcd,bound_raw,bound_clamped,pass");
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    let empirical: f64 = row[1].parse().unwrap();
    assert!((empirical - 0.0796).abs() < 0.01, "{empirical}");
}

fn saved_report() -> (PathBuf, ExperimentReport) {
    let path = temp("report.json");
    let (code, _, _) = rmt(&[
        "verify",
        "--dist",
        "gaussian,student:3",
        "--n",
        "2,4",
        "--trials",
        "80",
        "--eps",
        "0.5,0.7,0.9",
        "--no-timestamp",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let report = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    (path, report)
}

fn attr(tag: &str, name: &str) -> String {
    let key = format!(" {name}=\"");
    let start = tag.find(&key).unwrap() + key.len();
    tag[start..].split('"').next().unwrap().to_string()
}

#[test]
fn svg_points_lie_under_envelope() {
    let (_, report) = saved_report();
    assert!(report.c_hat > 0.0);
    let svg = render_svg(&report);
    let envelopes: Vec<&str> = svg.lines().filter(|l| l.contains("class=\"envelope\"")).collect();
    let points: Vec<&str> = svg.lines().filter(|l| l.contains("class=\"point\"")).collect();
    assert_eq!(envelopes.len(), 4);
    assert_eq!(points.len(), report.cells.len());
    for p in points {
        let (dist, n) = (attr(p, "data-dist"), attr(p, "data-n"));
        let value: f64 = attr(p, "data-p").parse().unwrap();
        let env: f64 = attr(p, "data-envelope").parse().unwrap();
        assert!(value <= env * (1.0 + 1e-12));
        let line = envelopes
            .iter()
            .find(|e| attr(e, "data-dist") == dist && attr(e, "data-n") == n)
            .unwrap();
        let (cx, cy) = (attr(p, "cx"), attr(p, "cy").parse::<f64>().unwrap());
        let vertex = attr(line, "points")
            .split(' ')
            .find(|v| v.split(',').next().unwrap() == cx)
            .map(|v| v.split(',').nth(1).unwrap().parse::<f64>().unwrap())
            .unwrap();
        // larger y is lower on the page
        assert!(cy >= vertex - 1e-3, "{cy} vs {vertex}");
    }
}

#[test]
fn report_command_rerenders() {
    let (path, report) = saved_report();
    let p = path.to_str().unwrap();
    let (code, svg, _) = rmt(&["report", "--input", p]);
    assert_eq!(code, 0);
    assert_eq!(svg, render_svg(&report));
    let (code, json, _) = rmt(&["report", "--input", p, "--format", "json"]);
    assert_eq!(code, 0);
    assert_eq!(json, std::fs::read_to_string(&path).unwrap());
    let (code, csv, _) = rmt(&["report", "--input", p, "--format", "csv"]);
    assert_eq!(code, 0);
    assert_eq!(csv.lines().count(), 1 + report.cells.len());
}

#[test]
fn render_to_file_and_empty_grid() {
    let (_, mut report) = saved_report();
    let out = temp("plot.svg");
    render_report(&report, &out, Format::Svg).unwrap();
    assert_eq!(std::fs::read_to_string(&out).unwrap(), render_svg(&report));

    report.cells.clear();
    let empty = temp("empty.svg");
    let _ = std::fs::remove_file(&empty);
    assert!(render_report(&report, &empty, Format::Svg).is_err());
    assert!(!empty.exists());
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_rmt");
    let ok = Command::new(bin).args(["lcd", "--vector", "1,0,0", "--r", "0.1", "--alpha", "10", "--tmax", "5"]).output().unwrap();
    assert_eq!(ok.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&ok.stdout).starts_with("0.9090909"));
    let bad = Command::new(bin).args(["verify", "--bogus-flag"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(1));
    assert!(!bad.stderr.is_empty());
}
