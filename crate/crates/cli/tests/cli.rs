use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn qprop(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qprop"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let out = qprop(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("JSON report")
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli-tests");
    fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn beta_examples() {
    let v = json(&["beta", "--eps", "0.5", "--r", "1", "--d", "8"]);
    assert_eq!(v["values"]["beta"].as_f64().unwrap(), 0.75);

    let v = json(&["beta", "--eps", "0.1", "--r", "2", "--d", "1000"]);
    let beta = v["values"]["beta"].as_f64().unwrap();
    // d → ∞ value 1 - ε²(3 - 2ε)/6; the finite-d correction is a few 1e-6.
    assert!((beta - 0.9953333).abs() < 1e-5, "{beta}");

    let out = qprop(&["beta", "--eps", "0.9", "--r", "2", "--d", "2"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    assert_eq!(String::from_utf8_lossy(&out.stderr).lines().count(), 1);

    let v = json(&["beta", "--eps", "1/4", "--r", "2", "--d", "9", "--oracle", "--grid", "256", "--samples", "500"]);
    assert_eq!(v["values"]["oracle"]["agrees"], Value::Bool(true));
}

#[test]
fn figure_examples() {
    let out = qprop(&["figure", "--points", "40", "--r-list", "1,2,5", "--d", "200"]);
    assert!(out.status.success());
    let csv = String::from_utf8(out.stdout).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("epsilon,r,d,beta"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 120);
    assert!(!csv.contains('\r'));
    for r in [1.0, 2.0, 5.0] {
        let curve: Vec<f64> = rows.iter().filter(|row| row[1] == r).map(|row| row[3]).collect();
        assert!(curve.windows(2).all(|w| w[1] <= w[0] + 1e-12));
    }
    let end5 = rows.iter().filter(|row| row[1] == 5.0).last().unwrap()[3];
    assert!((end5 - (1.0 - 1.0 / 720.0)).abs() < 1e-3);
    // At d = 200 the r = 1 endpoint is the uniform value 1/2 + 1/(2d).
    let end1 = rows.iter().filter(|row| row[1] == 1.0).last().unwrap()[3];
    assert!((end1 - 0.5025).abs() < 1e-12, "{end1}");

    let path = scratch("figure.csv");
    let v = json(&["figure", "--points", "10", "--out", path.to_str().unwrap()]);
    assert_eq!(v["values"]["rows"], 50);
    assert_eq!(fs::read_to_string(&path).unwrap().lines().count(), 51);

    let out = qprop(&["figure", "--out", "/nonexistent-dir/x.csv"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn accept_examples() {
    let v = json(&["accept", "--spectrum", "1/2,1/2", "-N", "2", "--r", "1"]);
    assert_eq!(v["values"]["acceptance"]["exact"], "3/4");
    assert_eq!(v["arithmetic_mode"], "rational");

    let v = json(&["accept", "--spectrum", "0.6,0.4", "-N", "2", "--r", "2"]);
    assert_eq!(v["values"]["acceptance"]["value"], 1.0);
    assert_eq!(v["values"]["acceptance"]["short_circuit"], true);

    let exact = json(&["accept", "--hard-instance", "2/5,3,3", "-N", "20", "--r", "2"]);
    let mc = json(&[
        "accept", "--hard-instance", "0.4,3,3", "-N", "20", "--r", "2", "--method", "mc", "--samples", "200000",
        "--arithmetic", "float",
    ]);
    let truth = exact["values"]["acceptance"]["value"].as_f64().unwrap();
    let est = mc["values"]["acceptance"]["value"].as_f64().unwrap();
    let se = mc["values"]["acceptance"]["stderr"].as_f64().unwrap();
    assert!((est - truth).abs() <= 3.0 * se, "{est} +- {se} vs {truth}");
    assert_eq!(mc["seed"], 1);

    let file = scratch("spectrum.json");
    fs::write(&file, r#"["1/3", 0.5, "1/6"]"#).unwrap();
    let v = json(&["accept", "--spectrum-file", file.to_str().unwrap(), "-N", "4", "--r", "1", "--method", "brute"]);
    let w = json(&["accept", "--spectrum", "1/2,1/3,1/6", "-N", "4", "--r", "1", "--method", "automaton"]);
    assert_eq!(v["values"]["acceptance"]["exact"], w["values"]["acceptance"]["exact"]);

    let out = qprop(&["accept", "--spectrum", "0.5,0.6", "-N", "3", "--r", "1"]);
    assert_eq!(out.status.code(), Some(2));
    let out = qprop(&["accept", "--spectrum", "1/3,1/3,1/3", "-N", "12", "--r", "1", "--method", "brute", "--cap", "brute-words=100"]);
    assert_eq!(out.status.code(), Some(3));
    let out = qprop(&["accept", "--spectrum", "1/2,1/2", "-N", "3", "--r", "1", "--cap", "bogus=1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn ttns_round_trip() {
    let tree = scratch("cat.json");
    let state = scratch("cat-state.json");
    let approx = scratch("cat-approx.json");
    let (t, s, a) = (tree.to_str().unwrap(), state.to_str().unwrap(), approx.to_str().unwrap());
    json(&["ttns", "tree", "--shape", "caterpillar", "--n", "5", "--out", t]);
    json(&["ttns", "random", "--tree", t, "--dims", "2,3,2,2,3", "--out", s, "--seed", "4"]);

    let full = json(&["ttns", "approx", "--tree", t, "--state", s, "--r", "9"]);
    assert!((full["values"]["certificate"]["measured_overlap"].as_f64().unwrap() - 1.0).abs() < 1e-12);

    let v = json(&["ttns", "approx", "--tree", t, "--state", s, "--r", "2", "--out", a]);
    let cert = &v["values"]["certificate"];
    let overlap = cert["measured_overlap"].as_f64().unwrap();
    let bound = cert["overlap_bound"].as_f64().unwrap();
    assert!(overlap >= bound - 1e-10);
    let check = json(&["ttns", "check", "--tree", t, "--state", a, "--r", "2"]);
    assert_eq!(check["values"]["check"]["is_ttns"], true);

    let out = qprop(&["ttns", "check", "--tree", t, "--state", s, "--r", "1"]);
    assert_eq!(out.status.code(), Some(4));

    let hard = scratch("hard.json");
    let v = json(&["ttns", "hardstate", "--tree", t, "--eps", "0.4", "--d", "3", "--r", "2", "--out", hard.to_str().unwrap()]);
    assert_eq!(v["values"]["farness"]["at_least_epsilon"], true);
    // Every edge carries all d = 3 Schmidt coefficients.
    let out = qprop(&["ttns", "check", "--tree", t, "--state", hard.to_str().unwrap(), "--r", "2"]);
    assert_eq!(out.status.code(), Some(4));
    let check = json(&["ttns", "check", "--tree", t, "--state", hard.to_str().unwrap(), "--r", "3"]);
    assert_eq!(check["values"]["check"]["is_ttns"], true);

    let out = qprop(&["ttns", "check", "--tree", t, "--state", t, "--r", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_and_mutation() {
    let v = json(&["verify", "--suite", "all"]);
    assert_eq!(v["values"]["passed"], true);
    for suite in ["partitions", "wss", "ranktest", "schmidt", "ttns", "bounds", "linalg"] {
        assert!(v["values"]["suites"][suite]["checks"].as_u64().unwrap() > 0);
    }
    let out = qprop(&["verify", "--suite", "partitions", "--mutate", "hook-off-by-one"]);
    assert_eq!(out.status.code(), Some(4));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["values"]["suites"]["partitions"]["passed"], false);
    assert_eq!(qprop(&["verify", "--suite", "nope"]).status.code(), Some(2));
}

#[test]
fn copies_examples() {
    let v = json(&["copies", "fewcopy", "--r", "1", "--eps", "0.3"]);
    assert_eq!(v["values"]["k"], 5);
    assert_eq!(v["values"]["copies"], 10);
    assert_eq!(qprop(&["copies", "fewcopy", "--r", "1", "--eps", "1/3"]).status.code(), Some(2));

    let a = json(&["copies", "tree", "--n", "9", "--r", "2", "--eps", "0.2"]);
    let b = json(&["copies", "tree", "--n", "17", "--r", "2", "--eps", "0.2"]);
    let ratio = b["values"]["upper"]["copies"].as_f64().unwrap() / a["values"]["upper"]["copies"].as_f64().unwrap();
    assert!((ratio - 2.0).abs() < 0.1, "{ratio}");
    assert!(!a["notes"].as_array().unwrap().is_empty());

    let v = json(&["copies", "fewcopy", "--r", "2", "--eps", "0.1", "--n", "5"]);
    assert!(v["values"]["tree"]["upper"].as_str().unwrap().parse::<f64>().is_ok());

    let v = json(&["copies", "prod2", "--n", "100", "--eps", "0.5"]);
    assert_eq!(v["values"]["budget"]["n3"], 800);

    let v = json(&["copies", "rank", "--r", "1", "--eps", "0.1"]);
    assert!(v["values"]["acceptance"].as_f64().unwrap() < 1.0 / 3.0);
}

#[test]
fn scan_and_csv() {
    let v = json(&["scan", "--n-max", "10", "--t-steps", "50"]);
    assert_eq!(v["values"]["scan"]["violations"], 0);
    let out = qprop(&["copies", "prod2", "--n", "100", "--eps", "0.5", "--format", "csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("key,value\n"));
    assert!(text.contains("budget.n3,800\n"));
}

#[test]
fn reports_are_reproducible() {
    let args = ["accept", "--spectrum", "0.5,0.3,0.2", "-N", "9", "--r", "2", "--method", "mc", "--arithmetic", "float", "--seed", "11"];
    let a = qprop(&args);
    let b = qprop(&args);
    assert_eq!(a.stdout, b.stdout);
    let other = qprop(&["accept", "--spectrum", "0.5,0.3,0.2", "-N", "9", "--r", "2", "--method", "mc", "--arithmetic", "float", "--seed", "12"]);
    assert_ne!(a.stdout, other.stdout);
}
