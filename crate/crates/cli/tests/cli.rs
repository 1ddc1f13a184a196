use std::path::Path;
use std::process::{Command, Output};

use cqec_core::closed_forms::alpha_nonmarkov_1q;

fn cqec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cqec")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) {
    let out = cqec(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
}

fn code(args: &[&str]) -> i32 {
    cqec(args).status.code().expect("exited normally")
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(|c| c.parse::<f64>().unwrap_or(f64::NAN)).collect())
        .collect();
    (header, rows)
}

fn column(header: &[String], rows: &[Vec<f64>], name: &str) -> Vec<f64> {
    let i = header.iter().position(|h| h == name).unwrap();
    rows.iter().map(|r| r[i]).collect()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn single_qubit_run_matches_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("h1.csv");
    ok(&["simulate", "--scenario", "hamiltonian-1q", "--R", "5", "--t-max", "5", "--samples", "51", "--out", s(&out)]);
    let (header, rows) = read_csv(&out);
    assert_eq!(&header[..4], ["t_dimensionless", "F_cw", "P_cs", "Lambda"]);
    for (t, f) in column(&header, &rows, "t_dimensionless").iter().zip(column(&header, &rows, "F_cw")) {
        assert!((f - alpha_nonmarkov_1q(*t, 1.0, 5.0)).abs() < 1e-6);
    }
}

#[test]
fn reduced_run_writes_coefficients() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("red.csv");
    ok(&["simulate", "--scenario", "hamiltonian-3q", "--R", "100", "--engine", "reduced", "--t-max", "50", "--out", s(&out)]);
    let (header, rows) = read_csv(&out);
    assert_eq!(header.len(), 4 + 13);
    assert_eq!(rows.len(), 101);
    let c0 = column(&header, &rows, "C_000_000");
    assert_eq!(c0, column(&header, &rows, "F_cw"));
    assert_eq!(c0[0], 1.0);
}

#[test]
fn zero_horizon_gives_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("zero.csv");
    ok(&["simulate", "--scenario", "markovian-3q", "--R", "10", "--t-max", "0", "--out", s(&out)]);
    let (header, rows) = read_csv(&out);
    assert_eq!(rows.len(), 1);
    assert_eq!(column(&header, &rows, "F_cw")[0], 1.0);
    assert!(column(&header, &rows, "Lambda")[0].is_nan());
}

#[test]
fn runs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    for out in [&a, &b] {
        ok(&[
            "simulate", "--scenario", "hamiltonian-1q", "--R", "3", "--engine", "monte-carlo", "--n-traj", "200",
            "--seed", "11", "--t-max", "2", "--samples", "11", "--out", s(out),
        ]);
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn sidecar_config_reproduces_run() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first.csv");
    ok(&["simulate", "--scenario", "hamiltonian-3q", "--R", "20", "--t-max", "1", "--samples", "11", "--out", s(&first)]);
    let sidecar = dir.path().join("first.csv.config.json");
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&sidecar).unwrap()).unwrap();
    assert_eq!(json["schema_version"], 1);
    assert_eq!(json["params"]["kappa"], 20.0);
    assert_eq!(json["code"], "bitflip3");
    let second = dir.path().join("second.csv");
    ok(&["simulate", "--config", s(&sidecar), "--out", s(&second)]);
    assert_eq!(std::fs::read(&first).unwrap(), std::fs::read(&second).unwrap());
}

#[test]
fn exit_codes() {
    // Configuration errors.
    assert_eq!(code(&["simulate", "--scenario", "nope", "--R", "1"]), 2);
    assert_eq!(code(&["simulate", "--scenario", "hamiltonian-1q"]), 2);
    assert_eq!(code(&["simulate", "--scenario", "markovian-1q", "--R", "1", "--engine", "reduced"]), 2);
    assert_eq!(code(&["simulate", "--scenario", "hamiltonian-1q", "--R", "1", "--gamma", "1", "--kappa", "2"]), 2);
    assert_eq!(code(&["scan", "--scenario", "markovian-1q", "--grid", "1,2,3"]), 2);

    let dir = tempfile::tempdir().unwrap();
    // Tolerances no step size can meet.
    let tight = dir.path().join("tight.json");
    std::fs::write(
        &tight,
        r#"{"schema_version": 1, "scenario": "hamiltonian-1q", "params": {"R": 2},
            "integrator": {"rtol": 1e-300, "atol": 1e-300}, "t_max": 1, "samples": 5}"#,
    )
    .unwrap();
    let out = dir.path().join("x.csv");
    assert_eq!(code(&["simulate", "--config", s(&tight), "--out", s(&out)]), 3);

    // One slow period sampled at 8 points cannot be fitted.
    let cfg = dir.path().join("scan.json");
    std::fs::write(
        &cfg,
        r#"{"schema_version": 1, "scenario": "hamiltonian-3q", "grid": [30, 50, 100, 200],
            "scan": {"mode": "coupling", "fit": true, "periods": 0.01, "fit_samples": 8}}"#,
    )
    .unwrap();
    let out = dir.path().join("scan.csv");
    assert_eq!(code(&["scan", "--config", s(&cfg), "--out", s(&out)]), 4);

    assert_eq!(code(&["simulate", "--config", s(&dir.path().join("missing.json"))]), 2);
}

#[test]
fn cross_validation_passes_at_default_tolerances() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cv.csv");
    ok(&[
        "simulate", "--scenario", "hamiltonian-3q", "--R", "10", "--t-max", "2", "--samples", "21", "--cross-validate",
        "--out", s(&out),
    ]);
}

fn local_maxima(y: &[f64]) -> usize {
    y.windows(3).filter(|w| w[1] > w[0] && w[1] >= w[2]).count()
}

#[test]
fn figure_datasets() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["fig", "1", "--out-dir", s(dir.path())]);
    for r in ["1", "2", "5"] {
        assert!(dir.path().join(format!("fig1_R{r}.csv")).exists());
    }
    let (header, rows) = read_csv(&dir.path().join("fig1_R1.csv"));
    assert_eq!(rows.len(), 1001);
    assert!(local_maxima(&column(&header, &rows, "F_cw")) >= 2);

    ok(&["fig", "4", "--out-dir", s(dir.path())]);
    let (header, rows) = read_csv(&dir.path().join("fig4_R100.csv"));
    let dip = column(&header, &rows, "F_cw").iter().fold(f64::INFINITY, |a, &b| a.min(b));
    assert!(1.0 - dip <= 0.03, "{dip}");

    assert_eq!(code(&["fig", "2", "--out-dir", s(dir.path())]), 2);
}

#[test]
fn eig_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("eig.json");
    ok(&["eig", "--R", "100", "--out", s(&out)]);
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(json["all_pass"], true);
    assert_eq!(json["zero_eigenvalues"], 1);
    assert_eq!(json["closed_under_conjugation"], true);
    assert_eq!(json["pairs"].as_array().unwrap().len(), 13);
    assert_eq!(json["config"]["scenario"], "hamiltonian-3q");
}

#[test]
fn scans_recover_scaling_laws() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("markov.csv");
    ok(&["scan", "--scenario", "markovian-1q", "--grid", "1000,3000,10000,30000", "--fit", "--out", s(&out)]);
    let fit: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("markov.csv.fit.json")).unwrap()).unwrap();
    let slope = fit["params"]["slope"].as_f64().unwrap();
    assert!((slope + 1.0).abs() < 0.01, "{slope}");

    let out = dir.path().join("coupling.csv");
    ok(&["scan", "--scenario", "hamiltonian-3q", "--mode", "coupling", "--grid", "30,50,100,200", "--fit", "--out", s(&out)]);
    let (header, rows) = read_csv(&out);
    assert_eq!(header, ["R", "omega", "decay", "reduction", "status"]);
    assert_eq!(rows.len(), 4);
    let fit: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("coupling.csv.fit.json")).unwrap()).unwrap();
    let slope = fit["params"]["slope"].as_f64().unwrap();
    assert!((slope - 2.0).abs() < 0.1, "{slope}");
}

#[test]
fn graph_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("graph.json");
    ok(&["graph", "--R", "50", "--out", s(&out)]);
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(json["R"], 50.0);
    assert_eq!(json["nodes"].as_array().unwrap().len(), 13);
    let edges = json["edges"].as_array().unwrap();
    assert!(edges.iter().any(|e| e["source"] == "correction"));
    assert!(edges.iter().any(|e| e["source"] == "decoherence"));
}
