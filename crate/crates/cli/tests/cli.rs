//! End-to-end runs of the `qmcmc` binary.

use std::path::Path;
use std::process::{Command, Output};

use qmcmc_core::problems::{sample_sk, InstanceRecord};

fn qmcmc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qmcmc"))
        .args(args)
        .env_remove("QMCMC_THREADS")
        .env_remove("RUST_LOG")
        .output()
        .expect("qmcmc runs")
}

fn qmcmc_ok(args: &[&str]) -> Output {
    let out = qmcmc(args);
    assert!(out.status.success(), "qmcmc {args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// Header row plus data rows (comment lines dropped).
fn rows(path: &Path) -> Vec<Vec<String>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#') && !l.is_empty())
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn column(table: &[Vec<String>], name: &str) -> usize {
    table[0].iter().position(|c| c == name).unwrap_or_else(|| panic!("no column {name}"))
}

fn dir_arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn gap_of_a_small_ising_ring_is_a_probability_gap() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    qmcmc_ok(&[
        "gap",
        "--model",
        "ising",
        "-n",
        "3",
        "--beta",
        "5",
        "--h",
        "1.5",
        "--alphas",
        "0,1",
        "-o",
        dir_arg(&out),
    ]);
    let table = rows(&out.join("gap_scan.csv"));
    assert_eq!(table.len(), 3);
    let d = column(&table, "delta");
    for row in &table[1..] {
        let delta: f64 = row[d].parse().unwrap();
        assert!(delta > 0.0 && delta <= 1.0, "delta {delta}");
    }
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("gap_summary.json")).unwrap()).unwrap();
    assert_eq!(summary["schema"], "qmcmc.gap_summary");
    assert!(out.join("gap.cfg").exists());
}

#[test]
fn reruns_are_deterministic_and_append_safe() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let args = |o: &Path| {
        vec!["gap", "--model", "sk", "-n", "4", "--instances", "3", "--seed", "11", "--alphas", "0,2", "-o"]
            .into_iter()
            .map(str::to_string)
            .chain([dir_arg(o).to_string()])
            .collect::<Vec<_>>()
    };
    let run = |o: &Path| {
        let v = args(o);
        qmcmc_ok(&v.iter().map(String::as_str).collect::<Vec<_>>());
    };
    run(&a);
    run(&b);
    let (ta, tb) = (rows(&a.join("gap_scan.csv")), rows(&b.join("gap_scan.csv")));
    assert_eq!(ta.len(), 1 + 3 * 2);
    assert_eq!(ta, tb);
    run(&a);
    assert_eq!(rows(&a.join("gap_scan.csv")), ta, "a rerun into the same directory must not add rows");
}

#[test]
fn changed_configuration_refuses_to_append() {
    let dir = tempfile::tempdir().unwrap();
    let o = dir_arg(dir.path());
    qmcmc_ok(&["gap", "--model", "ising", "-n", "3", "--alphas", "0", "-o", o]);
    let out = qmcmc(&["gap", "--model", "ising", "-n", "3", "--alphas", "0", "--beta", "2", "-o", o]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("config"), "{}", stderr(&out));
}

#[test]
fn size_above_the_dense_cap_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = qmcmc(&["gap", "--model", "ising", "-n", "15", "-o", dir_arg(dir.path())]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("14"), "{}", stderr(&out));
}

#[test]
fn bound_reaches_chains_beyond_exact_diagonalization() {
    let dir = tempfile::tempdir().unwrap();
    qmcmc_ok(&["ising-bound", "-n", "24..40:16", "--alphas", "0,2", "-o", dir_arg(dir.path())]);
    let table = rows(&dir.path().join("ising_bound.csv"));
    assert_eq!(table.len(), 5);
    let out = qmcmc(&["gap", "-n", "24", "-o", dir_arg(dir.path())]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("cap of 14"), "{}", stderr(&out));
    let out = qmcmc(&["ising-bound", "-n", "66", "--alphas", "0", "-o", dir_arg(dir.path())]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("cap of 64"), "{}", stderr(&out));
}

#[test]
fn odd_chain_length_is_rejected_by_the_bound() {
    let dir = tempfile::tempdir().unwrap();
    let out = qmcmc(&["ising-bound", "-n", "7", "-o", dir_arg(dir.path())]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("even"), "{}", stderr(&out));
}

#[test]
fn bound_rows_carry_their_terms_and_peaks() {
    let dir = tempfile::tempdir().unwrap();
    qmcmc_ok(&["ising-bound", "-n", "8", "--alphas", "0,1,2", "--peaks", "-o", dir_arg(dir.path())]);
    let table = rows(&dir.path().join("ising_bound.csv"));
    assert_eq!(table.len(), 4);
    let (b, t, s0, s1) = (
        column(&table, "bound"),
        column(&table, "tail_term"),
        column(&table, "sector0_term"),
        column(&table, "sector1_term"),
    );
    for row in &table[1..] {
        let f = |i: usize| row[i].parse::<f64>().unwrap();
        assert!((f(b) - (f(t) + f(s0) + f(s1))).abs() <= 1e-15 * f(b).max(1.0));
        assert!(f(t) > 0.0 && f(t) < 1e-6);
    }
    let peaks = rows(&dir.path().join("ising_peak.csv"));
    assert_eq!(peaks.len(), 2);
    assert_eq!(peaks[1][column(&peaks, "N")], "8");
}

#[test]
fn fit_recovers_a_synthetic_exponent() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("synthetic.csv");
    let mut text = String::from("N,delta\n");
    for n in 4..=12 {
        text += &format!("{n},{:e}\n", 0.8 * 2f64.powf(-0.3 * n as f64));
    }
    std::fs::write(&csv, text).unwrap();
    let json = dir.path().join("fit.json");
    qmcmc_ok(&["fit", "-i", dir_arg(&csv), "--kind", "exponential", "-o", dir_arg(&json)]);
    let fit: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    let k = fit["exponent"].as_f64().unwrap();
    assert!((k - 0.3).abs() < 1e-9, "exponent {k}");
    assert_eq!(format!("{k:.3}"), "0.300");
    assert_eq!(fit["points_used"], 9);
}

#[test]
fn malformed_csv_names_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("bad.csv");
    std::fs::write(&csv, "N,delta\n4,0.5\n5,0.25\n6,oops\n").unwrap();
    let out = qmcmc(&["fit", "-i", dir_arg(&csv), "-o", dir_arg(&dir.path().join("f.json"))]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("bad.csv:4"), "{}", stderr(&out));
}

#[test]
fn kappa_scan_reports_mean_and_limit() {
    let dir = tempfile::tempdir().unwrap();
    qmcmc_ok(&[
        "kappa",
        "--model",
        "sk",
        "-n",
        "4",
        "--instances",
        "1",
        "--alphas",
        "2",
        "--kappa",
        "scan",
        "--set",
        "kappa_points=6",
        "-o",
        dir_arg(dir.path()),
    ]);
    let table = rows(&dir.path().join("kappa_scan.csv"));
    let k = column(&table, "kappa");
    let labels: Vec<&str> = table[1..].iter().map(|r| r[k].as_str()).collect();
    assert_eq!(labels.len(), 8);
    assert_eq!(&labels[6..], ["avg", "inf"]);
    let se = column(&table, "stderr");
    assert!(table[7][se].parse::<f64>().unwrap() > 0.0);
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# small ring\nmodel = ising\nn = 3\nbeta = 2\nalphas = 0\n").unwrap();
    let out = dir.path().join("o");
    qmcmc_ok(&["gap", "--config", dir_arg(&cfg), "--beta", "4", "-o", dir_arg(&out)]);
    let table = rows(&out.join("gap_scan.csv"));
    assert_eq!(table[1][column(&table, "beta")].parse::<f64>().unwrap(), 4.0);
    let saved = std::fs::read_to_string(out.join("gap.cfg")).unwrap();
    assert!(saved.lines().any(|l| l.replace(' ', "") == "beta=4"), "{saved}");

    std::fs::write(&cfg, "colour = blue\n").unwrap();
    let bad = qmcmc(&["gap", "--config", dir_arg(&cfg), "-o", dir_arg(&out)]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(stderr(&bad).contains("run.cfg:1"), "{}", stderr(&bad));
}

#[test]
fn instance_file_replaces_sampling() {
    let dir = tempfile::tempdir().unwrap();
    let h = sample_sk(4, 77).unwrap();
    let path = dir.path().join("instance.json");
    std::fs::write(&path, serde_json::to_string(&InstanceRecord::from_hamiltonian(&h, Some(77))).unwrap()).unwrap();
    let out = dir.path().join("o");
    qmcmc_ok(&["gap", "--instance-file", dir_arg(&path), "--alphas", "0,3", "-o", dir_arg(&out)]);
    let table = rows(&out.join("gap_scan.csv"));
    assert_eq!(table.len(), 3);
    assert_eq!(table[1][column(&table, "model")], "sk");
    assert_eq!(table[1][column(&table, "seed")], "77");
}

#[test]
fn thread_count_does_not_change_results() {
    let dir = tempfile::tempdir().unwrap();
    let run = |threads: &str, sub: &str| {
        let o = dir.path().join(sub);
        let status = Command::new(env!("CARGO_BIN_EXE_qmcmc"))
            .args(["gap", "--model", "sk", "-n", "4", "--instances", "4", "--alphas", "0,1", "-o", dir_arg(&o)])
            .env("QMCMC_THREADS", threads)
            .output()
            .unwrap();
        assert!(status.status.success());
        rows(&o.join("gap_scan.csv"))
    };
    let one = run("1", "one");
    assert_eq!(one, run("3", "three"));
    let bad = Command::new(env!("CARGO_BIN_EXE_qmcmc"))
        .args(["gap", "-n", "3", "-o", dir_arg(dir.path())])
        .env("QMCMC_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn plot_data_validates_outputs_and_writes_the_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let o = dir_arg(dir.path());
    qmcmc_ok(&["disorder", "--model", "sk", "-n", "4..6", "--instances", "2", "--alphas", "0,2", "-o", o]);
    qmcmc_ok(&[
        "fit",
        "-i",
        dir_arg(&dir.path().join("scaling.csv")),
        "--filter",
        "series=peak",
        "-o",
        dir_arg(&dir.path().join("fit.json")),
    ]);
    qmcmc_ok(&["plot-data", "--dir", o]);
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("plot_manifest.json")).unwrap()).unwrap();
    let kinds: Vec<&str> =
        manifest["figures"].as_array().unwrap().iter().map(|f| f["kind"].as_str().unwrap()).collect();
    assert!(kinds.contains(&"GapVsAlpha") && kinds.contains(&"ScalingInset"), "{kinds:?}");

    let curve = dir.path().join("disorder_curve.csv");
    let text = std::fs::read_to_string(&curve).unwrap();
    std::fs::write(&curve, text.trim_end().to_string() + ",extra\n").unwrap();
    let bad = qmcmc(&["plot-data", "--dir", o]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(stderr(&bad).contains("disorder_curve.csv"), "{}", stderr(&bad));
}
