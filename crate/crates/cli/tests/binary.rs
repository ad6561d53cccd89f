use std::path::PathBuf;
use std::process::{Command, Output};

fn bochner(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bochner")).args(args).output().expect("spawn bochner")
}

fn scratch(name: &str, contents: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("bochner-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

const SMALL: &str = r#"{
  "seed": 3,
  "format": "text",
  "functions": [ { "id": "half", "catalog": "fractional_power", "params": { "alpha": 0.5 } } ],
  "experiments": [ { "kind": "moment_sweep", "functions": ["half"], "trials": 10 } ]
}"#;

#[test]
fn list_catalog() {
    let out = bochner(&["--list-catalog"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 11);
    assert!(text.contains("fractional_power"));
    assert!(text.contains("log1m"));
}

#[test]
fn runs_and_honours_format_override() {
    let path = scratch("small.json", SMALL);
    let text = bochner(&["run", path.to_str().unwrap()]);
    assert_eq!(text.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&text.stdout).contains("worst slack"));
    let csv = bochner(&["run", path.to_str().unwrap(), "--format", "csv"]);
    assert_eq!(csv.status.code(), Some(0));
    let csv = String::from_utf8(csv.stdout).unwrap();
    assert!(csv.starts_with("\"experiment\",\"case_id\""));
    assert_eq!(csv.lines().count(), 12);
}

#[test]
fn out_flag_writes_file() {
    let path = scratch("out.json", SMALL);
    let target = path.with_file_name("report.csv");
    let out = bochner(&["run", path.to_str().unwrap(), "--format", "csv", "--out", target.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let written = std::fs::read_to_string(&target).unwrap();
    assert_eq!(written.lines().count(), 12);
}

#[test]
fn config_errors_exit_two() {
    let bad_alpha = scratch("alpha.json", &SMALL.replace("0.5", "1.5"));
    let out = bochner(&["run", bad_alpha.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("functions[0].params.alpha"));

    let syntax = scratch("syntax.json", "{ \"seed\": }");
    let out = bochner(&["run", syntax.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 1"));

    assert_eq!(bochner(&["run", "/nonexistent/scenario.json"]).status.code(), Some(2));
}

#[test]
fn tight_tolerance_fails_with_exit_one() {
    let config = r#"{
  "functions": [ { "id": "half", "catalog": "fractional_power", "params": { "alpha": 0.5 } } ],
  "operators": [ { "kind": "random", "id": "R", "n": 1, "d": 4, "seed": 2 } ],
  "experiments": [ { "kind": "oracle_equivalence", "functions": ["half"], "operators": ["R"], "random_trials": 2, "grid_points": 5 } ]
}"#;
    let path = scratch("tight.json", config);
    let out = bochner(&["run", path.to_str().unwrap(), "--tol", "1e-30", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("\"FAIL\""));
}

#[test]
fn seed_flag_is_deterministic() {
    let path = scratch("seed.json", SMALL);
    let a = bochner(&["run", path.to_str().unwrap(), "--seed", "9"]);
    let b = bochner(&["run", path.to_str().unwrap(), "--seed", "9"]);
    let c = bochner(&["run", path.to_str().unwrap(), "--seed", "10"]);
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
}
