use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn run(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_admittance"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn config(name: &str) -> String {
    format!("{}/../../configs/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn analyze_exit_codes_follow_the_verdict() {
    let dir = TempDir::new().unwrap();
    let table = config("reference.json");
    assert_eq!(
        run(&["analyze", "--config", &table], dir.path())
            .status
            .code(),
        Some(0)
    );
    let report = json(&dir.path().join("report.json"));
    assert_eq!(report["report"]["verdict"], "stable");
    assert_eq!(
        report["metadata"]["config_hash"].as_str().unwrap().len(),
        64
    );

    let out = run(
        &["analyze", "--config", &table, "--override", "d=0.30"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));

    let out = run(
        &["analyze", "--override", "d=0", "--override", "ka=0"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn config_errors_exit_one_and_name_the_field() {
    let dir = TempDir::new().unwrap();
    let file = dir.path().join("no_mass.json");
    fs::write(
        &file,
        r#"{"d": 0.34, "kx": 100, "ky": 100, "ks": 0, "ka": 10}"#,
    )
    .unwrap();
    let out = run(&["analyze", "--config", file.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("`m`"));

    let out = run(&["simulate", "--override", "dt=-1"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("dt"));

    let out = run(&["rootlocus", "--override", "d_range=[1,1]"], dir.path());
    assert_eq!(out.status.code(), Some(1));

    let out = run(&["nonsense"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn rootlocus_starts_on_the_imaginary_axis_and_coincides() {
    let dir = TempDir::new().unwrap();
    let out = run(
        &[
            "rootlocus",
            "--override",
            "m=1",
            "--override",
            "ka=0",
            "--override",
            "d=0",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let text = fs::read_to_string(dir.path().join("rootlocus.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("d_m,re1,im1,re2,im2,re3,im3,re4,im4"));
    assert_eq!(lines.next(), Some("0,0,10,0,10,0,-10,0,-10"));
    assert_eq!(text.lines().count(), 401);

    let (b, c) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    run(
        &["rootlocus", "--config", &config("sheared.json")],
        b.path(),
    );
    run(
        &["rootlocus", "--config", &config("unequal_diagonal.json")],
        c.path(),
    );
    let read = |d: &TempDir| fs::read(d.path().join("rootlocus.csv")).unwrap();
    assert_eq!(read(&b), read(&c));
}

#[test]
fn simulate_writes_trajectory_status_and_violations() {
    let dir = TempDir::new().unwrap();
    let out = run(&["simulate"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let status = json(&dir.path().join("status.json"));
    assert_eq!(status["simulation"]["status"], "converged");
    let violations = json(&dir.path().join("violations.json"));
    assert!(!violations["violations"].as_array().unwrap().is_empty());
    let text = fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    assert_eq!(
        text.lines().next(),
        Some("t,x,y,vx,vy,fx,fy,ke,pe,e_diss,e_curl,v_total")
    );
    assert_eq!(text.lines().count(), 5002);
}

#[test]
fn outputs_are_deterministic() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    for dir in [&a, &b] {
        run(&["simulate"], dir.path());
        run(&["forcefield"], dir.path());
    }
    for name in [
        "trajectory.csv",
        "status.json",
        "forcefield.csv",
        "forcefield.json",
    ] {
        assert_eq!(
            fs::read(a.path().join(name)).unwrap(),
            fs::read(b.path().join(name)).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn sweep_default_grid_has_17_by_17_rows() {
    let dir = TempDir::new().unwrap();
    let out = run(&["sweep", "--workers", "4"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let text = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert_eq!(
        text.lines().next(),
        Some("ks,ka,d_min,status,d_min_analytic")
    );
    assert_eq!(text.lines().count(), 17 * 17 + 1);
    assert!(text.contains("\n0,10,0.4,simulated,0.316227766\n"));
    let meta = json(&dir.path().join("sweep.json"));
    assert_eq!(meta["sweep"]["d_increment"], 0.1);
}

#[test]
fn verify_reports_the_oracle_deviation() {
    let dir = TempDir::new().unwrap();
    let out = run(
        &["verify", "--override", "draws=2000", "--override", "seed=7"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let v = json(&dir.path().join("verify.json"));
    assert!(v["verify"]["max_relative_deviation"].as_f64().unwrap() <= 1e-8);
    assert_eq!(v["verify"]["draws"], 2000);
}

#[test]
fn forcefield_rows_and_hash_change_with_config() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    run(&["forcefield", "--override", "field_points=5"], a.path());
    run(
        &[
            "forcefield",
            "--override",
            "field_points=5",
            "--override",
            "ka=20",
        ],
        b.path(),
    );
    let text = fs::read_to_string(a.path().join("forcefield.csv")).unwrap();
    assert_eq!(text.lines().count(), 26);
    let hash =
        |d: &TempDir| json(&d.path().join("forcefield.json"))["metadata"]["config_hash"].clone();
    assert_ne!(hash(&a), hash(&b));
}
