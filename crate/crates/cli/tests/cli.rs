use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_packet-decoherence"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn rows(out: &Output) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_reader(out.stdout.as_slice());
    r.records()
        .map(|rec| rec.unwrap().iter().map(str::to_owned).collect())
        .collect()
}

fn header(out: &Output) -> Vec<String> {
    let mut r = csv::Reader::from_reader(out.stdout.as_slice());
    r.headers().unwrap().iter().map(str::to_owned).collect()
}

fn col(out: &Output, name: &str) -> usize {
    header(out).iter().position(|h| h == name).unwrap()
}

fn num(s: &str) -> f64 {
    s.parse().unwrap()
}

fn error_record(out: &Output) -> serde_json::Value {
    let text = String::from_utf8_lossy(&out.stderr);
    serde_json::from_str(text.lines().last().unwrap()).unwrap()
}

#[test]
fn evolve_starts_pure_and_approaches_asymptote() {
    let out = run(&["evolve", "--damping", "0.05", "--kappa", "0.05", "--theta-max", "100", "--theta-points", "41"]);
    assert!(out.status.success());
    let data = rows(&out);
    let s = col(&out, "s");
    assert_eq!(num(&data[0][s]), 1.0);
    let last = num(&data[40][s]);
    assert!((last / 0.05 - 1.0).abs() < 0.15, "s(θ_max) = {last}");
    for name in ["R", "S", "kappa", "zeta", "r", "lambda_c", "method", "weight", "gates"] {
        col(&out, name);
    }
}

#[test]
fn reruns_are_byte_identical() {
    let args = ["evolve", "--damping", "0.3,0.05", "--squeezing", "1.5,0.8", "--theta-points", "7"];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let data = rows(&a);
    let r = col(&a, "R");
    assert!(data.windows(2).all(|w| num(&w[0][r]) <= num(&w[1][r])));
}

#[test]
fn invalid_parameter_is_config_error() {
    let out = run(&["evolve", "--kappa", "-0.1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    assert_eq!(error_record(&out)["error"]["kind"], "invalid_parameter");
}

#[test]
fn empty_grid_in_config_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.toml");
    std::fs::write(&path, "[bath]\nkappa = []\n").unwrap();
    let out = run(&["validate", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_record(&out)["error"]["kind"], "config");
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.toml");
    std::fs::write(
        &path,
        "[bath]\ndamping = [0.02]\nkappa = [0.5]\nlambda_c = [200.0]\n[time]\ntheta = [0.5, 2.0]\n",
    )
    .unwrap();
    let out = run(&["evolve", "--config", path.to_str().unwrap(), "--lambda-c", "300"]);
    assert!(out.status.success());
    let data = rows(&out);
    assert_eq!(data.len(), 2);
    assert_eq!(num(&data[0][col(&out, "R")]), 0.02);
    assert_eq!(num(&data[0][col(&out, "lambda_c")]), 300.0);
}

#[test]
fn json_mirrors_csv() {
    let csv = run(&["fig-strong", "--damping", "10", "--kappa", "0.01"]);
    let json = run(&["fig-strong", "--damping", "10", "--kappa", "0.01", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&json.stdout).unwrap();
    let recs = v.as_array().unwrap();
    let data = rows(&csv);
    assert_eq!(recs.len(), data.len());
    let keys: Vec<&String> = recs[0].as_object().unwrap().keys().collect();
    let mut cols = header(&csv);
    cols.sort();
    let mut keys: Vec<String> = keys.into_iter().cloned().collect();
    keys.sort();
    assert_eq!(keys, cols);
    let g = num(&data[0][col(&csv, "gamma")]);
    assert!((g - 495.0).abs() < 1e-9);
}

#[test]
fn fig_weak_peak_and_divergence_flag() {
    let grid: Vec<String> = (0..=100).map(|k| format!("{}", 0.5 + 0.015 * k as f64)).collect();
    let zetas = grid.join(",");
    let out = run(&["fig-weak", "--damping", "0.01", "--kappa", "5", "--squeezing", &zetas]);
    assert!(out.status.success());
    let data = rows(&out);
    let (v, z, t) = (col(&out, "validity"), col(&out, "zeta"), col(&out, "tau_d_over_tau_r"));
    let general: Vec<&Vec<String>> = data.iter().filter(|r| r[v] == "general").collect();
    let peak = general
        .iter()
        .max_by(|a, b| num(&a[t]).partial_cmp(&num(&b[t])).unwrap())
        .unwrap();
    assert!((num(&peak[z]) - 1.0).abs() <= 0.02);

    let out = run(&["fig-weak", "--damping", "0.001", "--kappa", "50", "--squeezing", "1"]);
    let data = rows(&out);
    let d = col(&out, "divergent");
    assert!(data.iter().any(|r| r[d] == "true"));
}

#[test]
fn fig_weak_gate_violation_is_per_row() {
    let out = run(&["fig-weak", "--damping", "0.3", "--kappa", "1"]);
    assert!(out.status.success());
    let data = rows(&out);
    let status = col(&out, "status");
    assert!(data.iter().all(|r| r[status] != "ok"));
}

#[test]
fn divergence_slope_and_monotone_rows() {
    let out = run(&[
        "divergence",
        "--damping",
        "10",
        "--kappa",
        "100",
        "--weight",
        "zero-temperature",
        "--lambda-c",
        "1e2,1e3,1e4,1e5",
    ]);
    assert!(out.status.success());
    let data = rows(&out);
    let slope = num(&data[0][col(&out, "slope")]);
    assert!((slope / 40.0 - 1.0).abs() < 0.1);
    for name in ["d_c_over_sigma0", "s_inf"] {
        let c = col(&out, name);
        assert!(data.windows(2).all(|w| num(&w[1][c]) < num(&w[0][c])));
    }

    let out = run(&["divergence", "--lambda-c", "1e3"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_record(&out)["error"]["kind"], "window_too_narrow");
}

#[test]
fn snapshot_writes_grid_and_header() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("snap.csv");
    let out = run(&["snapshot", "--grid-points", "9", "--snapshot-theta", "2", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 1 + 81);
    assert!(text.starts_with("theta,q,r,magnitude,lambda_c\n"));
    let header: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(Path::new(&dir.path().join("snap.header.json"))).unwrap())
            .unwrap();
    assert_eq!(header["theta"], 2.0);
    assert!(header["purity"].as_f64().unwrap() < 1.0);

    let out = run(&["snapshot", "--damping", "0.05,0.3"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn validate_subset_and_tightened_tolerance() {
    let out = run(&["validate", "--criteria", "1,3"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(rows(&out).len(), 2);

    let out = run(&["validate", "--criteria", "1,2,3", "--tolerance-scale", "0.01"]);
    assert_eq!(out.status.code(), Some(4));
    let data = rows(&out);
    let passed = col(&out, "passed");
    assert!(data.iter().any(|r| r[passed] == "false"));
    assert_eq!(error_record(&out)["error"]["kind"], "validation");
}
