use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn qwalk(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qwalk"))
        .args(args)
        .current_dir(dir)
        .env_remove("QWALK_WORKERS")
        .output()
        .expect("binary runs")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn fig1_csv_schema() {
    let dir = TempDir::new().unwrap();
    let out = qwalk(dir.path(), &["fig1", "--dims", "19,5", "--out", "fig1.csv"]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = fs::read_to_string(dir.path().join("fig1.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next(),
        Some("T,quantum_return,classical_return,uniform_level")
    );
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    let u: f64 = first[3].parse().unwrap();
    assert!((u - 0.010526315789473684).abs() < 1e-15);
    assert!(!csv.contains('\r'));
    let manifest = json(&dir.path().join("fig1.manifest.json"));
    assert_eq!(manifest["schema_version"], 1);
    assert_eq!(manifest["subcommand"], "fig1");
    assert_eq!(manifest["config"]["dims"], serde_json::json!([19, 5]));
    assert_eq!(manifest["outputs"][0], "fig1.csv");
}

#[test]
fn lemma2_json_report() {
    let dir = TempDir::new().unwrap();
    let out = qwalk(
        dir.path(),
        &["lemma2", "--n", "19", "--T", "100", "--offset", "0"],
    );
    assert_eq!(out.status.code(), Some(0));
    let v = json(&dir.path().join("results/lemma2.json"));
    assert!((v["rhs"].as_f64().unwrap() - 100152.7).abs() < 0.1);
    assert_eq!(v["satisfied"], true);
    assert!(v["lhs"].as_f64().unwrap() >= 0.0);
}

#[test]
fn conjecture_csv_columns() {
    let dir = TempDir::new().unwrap();
    let args = [
        "conjecture",
        "--range",
        "10,30",
        "--pairs",
        "2",
        "--T-max",
        "200",
        "--T-points",
        "4",
    ];
    let out = qwalk(dir.path(), &[&args[..], &["--out", "one.csv"]].concat());
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = fs::read_to_string(dir.path().join("one.csv")).unwrap();
    assert!(csv.starts_with("n1,n2,T,lhs,rhs,satisfied\n"));
    assert_eq!(csv.lines().count(), 1 + 2 * 4);

    let out = qwalk(
        dir.path(),
        &[&args[..], &["--offsets", "0,1", "--out", "two.csv"]].concat(),
    );
    assert_eq!(out.status.code(), Some(0));
    let csv = fs::read_to_string(dir.path().join("two.csv")).unwrap();
    assert!(csv.starts_with("n1,n2,T,lhs,rhs,satisfied,offset\n"));
    assert_eq!(csv.lines().count(), 1 + 2 * 2 * 4);
}

#[test]
fn slow_jobs_require_the_slow_tier() {
    let dir = TempDir::new().unwrap();
    assert_eq!(qwalk(dir.path(), &["theorem3"]).status.code(), Some(1));
    assert_eq!(qwalk(dir.path(), &["conjecture"]).status.code(), Some(1));
    let out = qwalk(
        dir.path(),
        &["theorem3", "--tier", "slow", "--relaxed", "--dims", "19,5"],
    );
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = fs::read_to_string(dir.path().join("results/theorem3.csv")).unwrap();
    assert!(csv.starts_with("label,lhs,rhs,satisfied\n"));
    // strict mode refuses pairs outside the hypotheses
    let out = qwalk(
        dir.path(),
        &["theorem3", "--tier", "slow", "--dims", "19,5"],
    );
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn usage_errors_exit_one() {
    let dir = TempDir::new().unwrap();
    assert_eq!(qwalk(dir.path(), &["bogus"]).status.code(), Some(1));
    assert_eq!(
        qwalk(dir.path(), &["fig1", "--dims", "x"]).status.code(),
        Some(1)
    );
    assert_eq!(
        qwalk(dir.path(), &["lemma2", "--n", "20"]).status.code(),
        Some(1)
    );
    assert_eq!(
        qwalk(dir.path(), &["lemma2", "--format", "svg"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(qwalk(dir.path(), &["--help"]).status.code(), Some(0));
    assert_eq!(qwalk(dir.path(), &["--version"]).status.code(), Some(0));
}

#[test]
fn violated_bound_exits_two_and_writes_report() {
    let dir = TempDir::new().unwrap();
    let out = qwalk(
        dir.path(),
        &[
            "mix-coordinate",
            "--dims",
            "19,5",
            "--rounds",
            "1",
            "--epsilon",
            "0.01",
            "--out",
            "m.json",
        ],
    );
    assert_eq!(out.status.code(), Some(2));
    let v = json(&dir.path().join("m.json"));
    assert!(v["values"]["tv_joint"].as_f64().unwrap() > 0.01);
    assert_eq!(json(&dir.path().join("m.manifest.json"))["passed"], false);
}

#[test]
fn config_file_sits_below_flags() {
    let dir = TempDir::new().unwrap();
    fs::write(
        dir.path().join("run.cfg"),
        "# kernel run\nT = 9\ndims = 7,5\n",
    )
    .unwrap();
    let out = qwalk(
        dir.path(),
        &[
            "kernel", "--config", "run.cfg", "--T", "5", "--out", "k.csv",
        ],
    );
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let m = json(&dir.path().join("k.manifest.json"));
    assert_eq!(m["config"]["T"], 5.0);
    assert_eq!(m["config"]["dims"], serde_json::json!([7, 5]));
    assert_eq!(
        fs::read_to_string(dir.path().join("k.csv"))
            .unwrap()
            .lines()
            .count(),
        36
    );

    fs::write(dir.path().join("bad.cfg"), "colour=blue\n").unwrap();
    assert_eq!(
        qwalk(dir.path(), &["kernel", "--config", "bad.cfg"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn worker_count_from_environment() {
    let dir = TempDir::new().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_qwalk"))
        .args(["spectrum", "--out", "s.csv"])
        .current_dir(dir.path())
        .env("QWALK_WORKERS", "2")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        json(&dir.path().join("s.manifest.json"))["config"]["workers"],
        2
    );
}

#[test]
fn svg_chart_output() {
    let dir = TempDir::new().unwrap();
    let out = qwalk(dir.path(), &["fig1", "--T-max", "30", "--out", "fig1.svg"]);
    assert_eq!(out.status.code(), Some(0));
    let svg = fs::read_to_string(dir.path().join("fig1.svg")).unwrap();
    assert!(svg.starts_with("<svg"));
    assert_eq!(svg.matches("<polyline").count(), 3);
}

#[test]
fn every_subcommand_runs() {
    let dir = TempDir::new().unwrap();
    for args in [
        vec!["spectrum", "--dims", "5,3"],
        vec!["kernel", "--dims", "4,3", "--T", "2"],
        vec!["mix-classical", "--dims", "5,3", "--trajectories", "200"],
        vec!["mix-coordinate", "--dims", "7,5"],
        vec![
            "mix-repeated",
            "--dims",
            "7,5",
            "--mode",
            "sampled",
            "--trajectories",
            "2000",
        ],
        vec!["fig1", "--dims", "19,5"],
    ] {
        let out = qwalk(dir.path(), &args);
        assert_eq!(
            out.status.code(),
            Some(0),
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        assert!(dir.path().join(format!("results/{}.csv", args[0])).exists());
    }
}
