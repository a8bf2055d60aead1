use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn gipdyn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gipdyn"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn simulate_writes_requested_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("d.csv");
    let scara = root().join("robots/scara.json");
    let o = gipdyn(&[
        "simulate",
        "--robot",
        path_str(&scara),
        "--out",
        path_str(&out),
        "--samples",
        "100",
        "--seed",
        "7",
    ]);
    assert!(o.status.success(), "{o:?}");
    let text = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("# {"));
    assert_eq!(lines[1].split(',').count(), 17);
    assert_eq!(lines.len(), 2 + 100);
}

#[test]
fn certification_of_two_link_arm_passes() {
    let rr = root().join("robots/rr.json");
    let o = gipdyn(&["certify-prop1", "--robot", path_str(&rr)]);
    assert_eq!(o.status.code(), Some(0), "{o:?}");
    let text = stdout(&o);
    let residuals: Vec<f64> = text
        .lines()
        .filter(|l| l.starts_with("joint"))
        .map(|l| l.split_whitespace().nth(3).unwrap().parse().unwrap())
        .collect();
    assert_eq!(residuals.len(), 2);
    assert!(residuals.iter().all(|r| *r < 1e-8), "{text}");
}

#[test]
fn noiseless_exact_fit_evaluates_to_zero_error() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.csv");
    let model = dir.path().join("m.json");
    let rr = root().join("robots/rr.json");
    let o = gipdyn(&[
        "simulate",
        "--robot",
        path_str(&rr),
        "--out",
        path_str(&data),
        "--samples",
        "300",
        "--noise",
        "0",
    ]);
    assert!(o.status.success(), "{o:?}");
    let o = gipdyn(&[
        "train",
        "--data",
        path_str(&data),
        "--robot",
        path_str(&rr),
        "--estimator",
        "FE",
        "--out",
        path_str(&model),
    ]);
    assert!(o.status.success(), "{o:?}");
    let report = dir.path().join("r.json");
    let o = gipdyn(&[
        "evaluate",
        "--model",
        path_str(&model),
        "--data",
        path_str(&data),
        "--out",
        path_str(&report),
    ]);
    assert!(o.status.success(), "{o:?}");
    let r: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(report).unwrap()).unwrap();
    for v in r["nmse"].as_array().unwrap() {
        assert!(v.as_f64().unwrap() < 1e-12, "{r}");
    }
}

#[test]
fn gp_estimator_trains_and_reloads() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.csv");
    let model = dir.path().join("m.json");
    let o = gipdyn(&[
        "simulate",
        "--out",
        path_str(&data),
        "--samples",
        "150",
        "--seed",
        "3",
    ]);
    assert!(o.status.success(), "{o:?}");
    let config = root().join("configs/smoke.json");
    let o = gipdyn(&[
        "train",
        "--data",
        path_str(&data),
        "--estimator",
        "gip",
        "--config",
        path_str(&config),
        "--out",
        path_str(&model),
        "--seed",
        "5",
    ]);
    assert!(o.status.success(), "{o:?}");
    let o = gipdyn(&[
        "evaluate",
        "--model",
        path_str(&model),
        "--data",
        path_str(&data),
    ]);
    assert!(o.status.success(), "{o:?}");
    assert!(stdout(&o).contains("gmse"));
}

#[test]
fn smoke_monte_carlo_writes_records() {
    let dir = tempfile::tempdir().unwrap();
    let config = root().join("configs/smoke.json");
    let o = gipdyn(&[
        "monte-carlo",
        "--config",
        path_str(&config),
        "--seed",
        "4",
        "--out-dir",
        path_str(dir.path()),
    ]);
    assert!(o.status.success(), "{o:?}");
    let csv = std::fs::read_to_string(dir.path().join("records.csv")).unwrap();
    // Header plus one row per joint of the single GIP trial.
    assert_eq!(csv.lines().count(), 1 + 4);
    assert!(csv.lines().skip(1).all(|l| l.starts_with("0,GIP,")));
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap())
            .unwrap();
    assert_eq!(summary["summary"]["GIP"]["failures"], 0);
}

#[test]
fn single_point_data_efficiency_runs() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("c.json");
    let mut c: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(root().join("configs/smoke.json")).unwrap())
            .unwrap();
    c["grid"] = serde_json::json!([80]);
    std::fs::write(&config, c.to_string()).unwrap();
    let o = gipdyn(&[
        "data-efficiency",
        "--config",
        path_str(&config),
        "--out-dir",
        path_str(dir.path()),
    ]);
    assert!(o.status.success(), "{o:?}");
    let csv = std::fs::read_to_string(dir.path().join("curve.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
}

#[test]
fn usage_errors_exit_with_one() {
    let o = gipdyn(&["simulate", "--bogus-flag"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!o.stderr.is_empty());
    let o = gipdyn(&[
        "train",
        "--data",
        "/nonexistent.csv",
        "--out",
        "/tmp/x.json",
    ]);
    assert_eq!(o.status.code(), Some(1));
    let o = gipdyn(&["monte-carlo", "--estimators", "NN"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn help_exits_successfully() {
    let o = gipdyn(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("certify-prop1"));
}
