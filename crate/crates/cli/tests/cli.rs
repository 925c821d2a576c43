use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_flowspace-cli")).args(args).output().expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("flowspace-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is a JSON report")
}

fn all_pass(v: &Value) -> bool {
    v["checks"].as_array().unwrap().iter().all(|c| c["pass"] == Value::Bool(true))
}

#[test]
fn verify_metric_passes_and_is_deterministic() {
    let args = ["verify-metric", "--space", "euclidean2", "--samples", "1000", "--seed", "7"];
    let a = cli(&args);
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    let v = report(&a);
    assert_eq!(v["command"], "verify-metric");
    assert_eq!(v["parameters"]["seed"], 7);
    assert!(all_pass(&v));
    let b = cli(&args);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn verify_flow_on_each_space() {
    for space in ["euclidean2", "tree", "hyperbolic"] {
        let o = cli(&["verify-flow", "--space", space, "--samples", "60", "--seed", "3"]);
        assert_eq!(o.status.code(), Some(0), "{space}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(all_pass(&report(&o)));
    }
}

#[test]
fn config_file_supplies_defaults_and_flags_win() {
    let cfg = scratch("metric.json");
    let out = scratch("metric-out.json");
    std::fs::write(&cfg, format!(r#"{{"space": "tree", "samples": 40, "seed": 5, "out": {:?}}}"#, out.to_str().unwrap())).unwrap();
    let o = cli(&["verify-metric", "--config", cfg.to_str().unwrap(), "--seed", "9"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(o.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["parameters"]["space"], "tree");
    assert_eq!(v["parameters"]["samples"], 40);
    assert_eq!(v["parameters"]["seed"], 9);
}

#[test]
fn usage_and_config_errors_exit_with_two() {
    assert_eq!(cli(&["verify-metric", "--space", "sphere"]).status.code(), Some(2));
    assert_eq!(cli(&["verify-flow-estimates", "--delta", "-1"]).status.code(), Some(2));
    assert_eq!(cli(&["verify-metric", "--bogus"]).status.code(), Some(2));
    assert_eq!(cli(&["sweep", "nonsense"]).status.code(), Some(2));
    assert_eq!(cli(&["build-cover", "--action", "f2"]).status.code(), Some(2));
    let bad = scratch("bad.json");
    std::fs::write(&bad, r#"{"spcae": "tree"}"#).unwrap();
    assert_eq!(cli(&["verify-metric", "--config", bad.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(cli(&["check-cover", "/nonexistent/cover.json"]).status.code(), Some(2));
}

#[test]
fn flow_estimates_for_an_action() {
    let o = cli(&["verify-flow-estimates", "--action", "z2", "--delta", "0.5", "--samples", "50", "--seed", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v = report(&o);
    assert!(all_pass(&v));
    assert!(v["parameters"]["action_constants"].is_object());
}

#[test]
fn cover_round_trip_and_chains_with_cover() {
    let path = scratch("cover.json");
    let o = cli(&["build-cover", "--action", "z", "--gamma", "1", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let o = cli(&["check-cover", path.to_str().unwrap(), "--samples", "30", "--seed", "4"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(all_pass(&report(&o)));

    let o = cli(&["build-cover", "--action", "z2", "--gamma", "1", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let o = cli(&["verify-chains", "--action", "z2", "--samples", "30", "--seed", "6", "--cover", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v = report(&o);
    assert!(all_pass(&v));
    let names: Vec<&str> = v["checks"].as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap()).collect();
    assert!(names.contains(&"s-long"));
    assert!(names.contains(&"chain-total-n3"));
}

#[test]
fn verify_axes_runs_both_suites() {
    let o = cli(&["verify-axes", "--samples", "60", "--seed", "8"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(all_pass(&report(&o)));
}

#[test]
fn sweep_writes_csv() {
    let o = cli(&["sweep", "shift", "--space", "tree", "--samples", "5", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("parameter,deviation"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|r| r.len() == 2));
}
