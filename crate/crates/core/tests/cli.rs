use std::path::Path;
use std::process::{Command, Stdio};

use pgs_core::cli::{main_with_args, EXIT_INVALID, EXIT_OK};
use pgs_core::montecarlo::RUNS_COLUMNS;
use serde_json::Value;

fn pgs(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("pgs").chain(args.iter().copied());
    let code = main_with_args(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn validate_prints_resolved_config() {
    let (code, out, _) = pgs(&["validate", "--set", "observer.epsilon=0.04"]);
    assert_eq!(code, EXIT_OK);
    let cfg: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(cfg["observer"]["epsilon"], 0.04);
    assert!(cfg["guidance"]["nav_ratio"].is_number());
    assert!(cfg["seed"].is_u64());
}

#[test]
fn unknown_key_is_rejected() {
    let (code, _, err) = pgs(&["validate", "--set", "observer.gamma=1"]);
    assert_eq!(code, EXIT_INVALID);
    assert!(err.contains("observer.gamma"), "{err}");

    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("c.json");
    std::fs::write(&file, r#"{"seeker": {"lag": 0.1}}"#).unwrap();
    let (code, _, err) = pgs(&["validate", "--config", file.to_str().unwrap()]);
    assert_eq!(code, EXIT_INVALID);
    assert!(err.contains("lag"), "{err}");
}

#[test]
fn non_hurwitz_gains_are_named() {
    let (code, _, err) = pgs(&["validate", "--set", "observer.k1=0"]);
    assert_eq!(code, EXIT_INVALID);
    assert!(err.to_lowercase().contains("hurwitz"), "{err}");
}

#[test]
fn run_writes_parseable_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let (code, stdout, err) = pgs(&["run", "--out", out_dir.to_str().unwrap(), "--seed", "42"]);
    assert_eq!(code, EXIT_OK, "{err}");
    assert!(stdout.contains("closest_approach"), "{stdout}");

    let metrics = read_json(&out_dir.join("metrics.json"));
    assert_eq!(metrics["seed"], 42);
    assert_eq!(metrics["config"]["seed"], 42);
    assert_eq!(metrics["metrics"]["termination_reason"], "closest_approach");
    assert!(metrics["metrics"]["miss_distance"].as_f64().unwrap() >= 0.0);

    let mut r = csv::Reader::from_path(out_dir.join("engagement.csv")).unwrap();
    assert_eq!(r.headers().unwrap().len(), 18);
    let rows = r.records().count();
    assert_eq!(rows as u64, metrics["metrics"]["steps"].as_u64().unwrap());
}

#[test]
fn echoed_config_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("a");
    let second = dir.path().join("b");
    let (code, _, _) = pgs(&["run", "--out", first.to_str().unwrap(), "--set", "guidance.nav_ratio=3.5"]);
    assert_eq!(code, EXIT_OK);
    let echoed = read_json(&first.join("metrics.json"))["config"].clone();
    let file = dir.path().join("echo.json");
    std::fs::write(&file, serde_json::to_string(&echoed).unwrap()).unwrap();
    let (code, _, _) = pgs(&["run", "--config", file.to_str().unwrap(), "--out", second.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(
        std::fs::read(first.join("engagement.csv")).unwrap(),
        std::fs::read(second.join("engagement.csv")).unwrap()
    );
    assert_eq!(
        read_json(&first.join("metrics.json")),
        read_json(&second.join("metrics.json"))
    );
}

#[test]
fn timeout_is_not_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let (code, stdout, _) = pgs(&[
        "run",
        "--out",
        out_dir.to_str().unwrap(),
        "--set",
        "engagement.max_time=0.5",
    ]);
    assert_eq!(code, EXIT_OK);
    assert!(stdout.contains("timeout"), "{stdout}");
}

#[test]
fn sweep_outputs_match_their_schema() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let (code, stdout, err) = pgs(&[
        "sweep",
        "--out",
        out_dir.to_str().unwrap(),
        "--set",
        "sweep.samples_per_delay=1",
        "--set",
        "sweep.delays=[0.05,0.2]",
        "--jobs",
        "2",
    ]);
    assert_eq!(code, EXIT_OK, "{err}");
    assert!(stdout.contains("mean_miss"));

    let mut r = csv::Reader::from_path(out_dir.join("sweep_runs.csv")).unwrap();
    let header: Vec<String> = r.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(header, RUNS_COLUMNS);
    assert_eq!(r.records().count(), 4);

    let mut p = csv::Reader::from_path(out_dir.join("sweep_plotdata.csv")).unwrap();
    assert_eq!(p.headers().unwrap().get(0), Some("delay"));
    assert_eq!(p.records().count(), 2);

    let summary = read_json(&out_dir.join("sweep_summary.json"));
    assert_eq!(summary["total_runs"], 4);
    assert_eq!(summary["failure_count"], 0);
    assert_eq!(summary["std_kind"], "population");
    assert_eq!(summary["groups"].as_array().unwrap().len(), 4);
    assert_eq!(summary["config"]["sweep"]["samples_per_delay"], 1);
    assert_eq!(summary["seed"], summary["config"]["seed"]);
}

#[test]
fn demo_prints_three_scenarios() {
    let (code, out, _) = pgs(&["demo"]);
    assert_eq!(code, EXIT_OK);
    for label in ["zero delay", "delayed", "observer"] {
        assert!(out.contains(label), "{out}");
    }
    assert!(out.contains("miss reduction"));
}

#[test]
fn bad_arguments_exit_invalid() {
    assert_eq!(pgs(&["frobnicate"]).0, EXIT_INVALID);
    assert_eq!(pgs(&["run", "--seed", "minus-one"]).0, EXIT_INVALID);
    assert_eq!(pgs(&["validate", "--set", "no-equals-sign"]).0, EXIT_INVALID);
}

#[test]
fn seed_precedence_through_the_binary() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("c.json");
    std::fs::write(&file, r#"{"seed": 1}"#).unwrap();
    let seed_of = |env: Option<&str>, flag: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_pgs"));
        cmd.args(["validate", "--config", file.to_str().unwrap()]);
        cmd.env_remove("PGS_SEED");
        if let Some(e) = env {
            cmd.env("PGS_SEED", e);
        }
        if let Some(f) = flag {
            cmd.args(["--seed", f]);
        }
        let out = cmd.output().unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let cfg: Value = serde_json::from_slice(&out.stdout).unwrap();
        cfg["seed"].as_u64().unwrap()
    };
    assert_eq!(seed_of(None, None), 1);
    assert_eq!(seed_of(Some("2"), None), 2);
    assert_eq!(seed_of(Some("2"), Some("3")), 3);
}

#[test]
fn binary_reports_exit_codes() {
    let status = Command::new(env!("CARGO_BIN_EXE_pgs"))
        .args(["validate", "--set", "observer.k1=0"])
        .stderr(Stdio::null())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(EXIT_INVALID));
}
