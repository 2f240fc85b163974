use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_schwartz"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(args: &[&str]) -> i32 {
    run(args).status.code().unwrap()
}

fn json(args: &[&str]) -> serde_json::Value {
    let mut a = vec!["--format", "json"];
    a.extend_from_slice(args);
    let out = run(&a);
    serde_json::from_slice(&out.stdout).expect("valid JSON")
}

fn scratch(name: &str, contents: &str) -> PathBuf {
    let p = std::env::temp_dir().join(format!("schwartz-cli-{}-{name}", std::process::id()));
    std::fs::write(&p, contents).unwrap();
    p
}

#[test]
fn exit_codes() {
    assert_eq!(code(&["symbol-check", "--phi", "x^2+1"]), 0);
    assert_eq!(code(&["symbol-check", "--phi", "sin(x)"]), 1);
    assert_eq!(code(&["closed-range", "--phi", "piecewise((-inf,-1]: -exp(-x); [1,inf): exp(x); blend: 8)"]), 1);
    assert_eq!(code(&["closed-range", "--phi", "x^2"]), 0);
    assert_eq!(code(&["closed-range", "--phi", "sin(x)"]), 3);
    assert_eq!(code(&["multiplier-check", "--F", "3*x^2"]), 0);
    assert_eq!(code(&["multiplier-check", "--F", "exp(-x^2)"]), 1);
    assert_eq!(code(&["parse", "x +* 2"]), 3);
    assert_eq!(code(&["no-such-command"]), 3);
    assert_eq!(code(&["seminorm", "--f", "exp(-x^2)", "--n", "1", "--region", "bad"]), 3);
}

#[test]
fn seminorm_report() {
    let v = json(&["seminorm", "--f", "exp(-x^2)", "--n", "1"]);
    let est = &v["sections"]["seminorm"];
    assert!((est["value"].as_f64().unwrap() - 4.0 / std::f64::consts::E).abs() < 1e-5);
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["command"], "seminorm");
    assert_eq!(v["input"]["f"], "exp(-x^2)");
    assert!(v["config"]["x_max"].is_number());
}

#[test]
fn closed_range_trace_names_rule() {
    let v = json(&["closed-range", "--phi", "piecewise((-inf,-1]: -exp(x^2); [1,inf): exp(x^2); blend: 8)"]);
    let cr = &v["sections"]["closed_range"];
    assert_eq!(cr["status"], "NotClosed");
    assert!(cr["fired"].as_array().unwrap().iter().any(|r| r == "asterisco"));
    assert_eq!(cr["trace"].as_array().unwrap().len(), 6);
}

#[test]
fn json_is_deterministic() {
    let a = run(&["--format", "json", "symbol-check", "--phi", "x+sin(exp(x^2))"]).stdout;
    let b = bin()
        .env("SCHWARTZ_WORKERS", "1")
        .args(["--format", "json", "symbol-check", "--phi", "x+sin(exp(x^2))"])
        .output()
        .unwrap()
        .stdout;
    assert_eq!(a, b);
}

#[test]
fn bad_worker_count() {
    let out = bin().env("SCHWARTZ_WORKERS", "zero").args(["parse", "x"]).output().unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn config_file_and_overrides() {
    let p = scratch("cfg.txt", "x_max = 20000\nmax_order = 3\n");
    let ps = p.to_str().unwrap();
    let v = json(&["--config", ps, "parse", "x"]);
    assert_eq!(v["config"]["x_max"], 20000.0);
    assert_eq!(v["config"]["max_order"], 3);
    let v = json(&["--config", ps, "--set", "max_order=2", "parse", "x"]);
    assert_eq!(v["config"]["max_order"], 2);
    assert_eq!(v["config"]["x_max"], 20000.0);
    let bad = scratch("bad.txt", "no_such_key = 1\n");
    assert_eq!(code(&["--config", bad.to_str().unwrap(), "parse", "x"]), 3);
}

#[test]
fn corpus_harness() {
    let empty = scratch("empty.txt", "# nothing here\n");
    assert_eq!(code(&["corpus", "--file", empty.to_str().unwrap()]), 3);
    let flipped = scratch("flip.txt", "symbol | flipped-entry | x^2+1 | fails:i\nsymbol | fine | x | holds\n");
    let out = run(&["corpus", "--file", flipped.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("flipped-entry"));
    let good = scratch("good.txt", "symbol | a | x^3 | holds\nmultiplier | b | 2*x | holds\n");
    assert_eq!(code(&["corpus", "--file", good.to_str().unwrap()]), 0);
}

#[test]
fn csv_output() {
    let p = std::env::temp_dir().join(format!("schwartz-cli-{}-w.csv", std::process::id()));
    let ps = p.to_str().unwrap();
    assert_eq!(code(&["--emit-csv", ps, "witness", "--phi", "x+sin(exp(x^2))", "--violation", "i", "--count", "4"]), 0);
    let text = std::fs::read_to_string(&p).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x,j,m,value,log_value"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 4);
    for r in &rows {
        assert!(r[3] >= r[1], "{r:?}");
    }
}

#[test]
fn noncompact_demo_reports_members() {
    let v = json(&["noncompact-demo", "--phi", "x^3+x", "--interval", "1,2", "--p", "2", "--eps", "1", "--count", "5"]);
    let m = v["sections"]["noncompact"]["members"].as_array().unwrap();
    assert_eq!(m.len(), 5);
    assert_eq!(code(&["noncompact-demo", "--phi", "sin(x)", "--interval", "0,3.14159", "--p", "2"]), 3);
}

#[test]
fn compose_deriv_at_point() {
    let v = json(&["compose-deriv", "--f", "sin(x)", "--phi", "x^2", "--n", "2", "--at", "0.5"]);
    let at = &v["sections"]["compose_deriv"]["at"];
    let x: f64 = 0.5;
    let oracle = 2.0 * (x * x).cos() - 4.0 * x * x * (x * x).sin();
    assert!((at["value"].as_f64().unwrap() - oracle).abs() < 1e-12);
}
