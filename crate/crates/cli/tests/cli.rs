use std::path::Path;
use std::process::{Command, Output};

fn laurent(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_laurent"))
        .args(args)
        .current_dir(dir)
        .env_remove("LAURENT_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    std::fs::write(dir.join(name), text).unwrap();
    name.to_string()
}

const MONOMIAL: &str = r#"{"function": {"name": "e2", "expr": {"kind": "monomial", "exponent": [2]},
    "validity": {"axes": [{"kind": "disc", "outer": 1.0}]}}, "box": 3, "grid": 8}"#;

const SHORT_GEOMETRIC: &str = r#"{"function": "geometric", "box": 3,
    "region": {"axes": [{"kind": "disc", "outer": 1.0}]}, "torus": [1.0]}"#;

#[test]
fn coeffs_of_a_monomial_has_one_unit_entry() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "m.json", MONOMIAL);
    let out = laurent(&["coeffs", "--config", &cfg, "--out", "o"], tmp.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));

    let mut rd = csv::Reader::from_path(tmp.path().join("o/coeffs.csv")).unwrap();
    let mut big = Vec::new();
    for row in rd.records() {
        let row = row.unwrap();
        let a: i64 = row[0].parse().unwrap();
        let re: f64 = row[1].parse().unwrap();
        let im: f64 = row[2].parse().unwrap();
        if (re * re + im * im).sqrt() > 1e-12 {
            big.push((a, re, im));
        }
    }
    assert_eq!(big.len(), 1);
    assert_eq!(big[0].0, 2);
    assert!((big[0].1 - 1.0).abs() < 1e-14 && big[0].2.abs() < 1e-14);
    assert!(tmp.path().join("o/coeffs.json").exists());
}

#[test]
fn invalid_config_exits_two() {
    let tmp = tempfile::tempdir().unwrap();
    for (i, text) in [
        r#"{"function": "geometric", "box": 2, "grid": 1}"#,
        r#"{"function": "geometric", "box": 2, "seed": "x"}"#,
        "not json",
    ]
    .iter()
    .enumerate()
    {
        let cfg = write(tmp.path(), &format!("bad{i}.json"), text);
        let out = laurent(&["seminorms", "--config", &cfg], tmp.path());
        assert_eq!(out.status.code(), Some(2), "{text}");
        assert!(String::from_utf8_lossy(&out.stderr).contains("invalid config"));
    }
    let out = laurent(&["tails"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn failed_verdict_exits_one() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "g.json", SHORT_GEOMETRIC);
    let out = laurent(&["tails", "--config", &cfg, "--out", "o"], tmp.path());
    assert_eq!(out.status.code(), Some(1));
    let verdict: serde_json::Value =
        serde_json::from_slice(&std::fs::read(tmp.path().join("o/tails.json")).unwrap()).unwrap();
    assert_eq!(verdict["passed"], false);
}

#[test]
fn out_dir_falls_back_to_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "m.json", MONOMIAL);
    let out = Command::new(env!("CARGO_BIN_EXE_laurent"))
        .args(["seminorms", "--config", &cfg])
        .current_dir(tmp.path())
        .env("LAURENT_OUT_DIR", "from_env")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(tmp.path().join("from_env/seminorms.csv").exists());
}

#[test]
fn same_seed_gives_identical_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "p.json",
        r#"{"function": "geometric", "box": 20, "region": {"axes": [{"kind": "disc", "outer": 1.0}]},
            "torus": [1.0], "grid": 64, "trials": 5, "orders": [0, 1]}"#,
    );
    for (dir, workers) in [("a", "1"), ("b", "2")] {
        let out = laurent(
            &["report", "--config", &cfg, "--out", dir, "--seed", "7", "--workers", workers],
            tmp.path(),
        );
        assert!(out.status.code().is_some());
    }
    let mut names: Vec<_> = std::fs::read_dir(tmp.path().join("a"))
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .filter(|n| n.to_string_lossy().ends_with(".csv"))
        .collect();
    names.sort();
    assert!(names.len() >= 6);
    for n in names {
        let a = std::fs::read(tmp.path().join("a").join(&n)).unwrap();
        let b = std::fs::read(tmp.path().join("b").join(&n)).unwrap();
        assert_eq!(a, b, "{n:?}");
    }
}

#[test]
fn acceptance_runs_a_single_criterion() {
    let tmp = tempfile::tempdir().unwrap();
    let out = laurent(&["acceptance", "--criterion", "4", "--out", "o"], tmp.path());
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(text.lines().count(), 1);
    assert!(text.starts_with("[PASS] criterion  4"));

    let out = laurent(&["acceptance", "--criterion", "13"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
}
