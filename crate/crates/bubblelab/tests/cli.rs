use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bubblelab"))
        .args(args)
        .env("BUBBLELAB_OUT_DIR", dir)
        .output()
        .expect("binary runs")
}

fn report(dir: &Path, name: &str) -> Value {
    let text = std::fs::read_to_string(dir.join(format!("{name}.json"))).unwrap();
    serde_json::from_str(&text).unwrap()
}

#[test]
fn constants_for_s5() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["constants", "--n", "5", "--k", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let v = report(dir.path(), "constants");
    assert_eq!(v["schema_version"], 1);
    let r = &v["report"];
    assert!((r["c"].as_f64().unwrap() - 15.0).abs() < 1e-12);
    assert!((r["b"].as_f64().unwrap() - 0.0126651).abs() < 1e-7);
    assert!((r["two_star"].as_f64().unwrap() - 10.0 / 3.0).abs() < 1e-12);
    assert!((r["Y"].as_f64().unwrap() - 14.81).abs() < 5e-3);
}

#[test]
fn stdout_matches_written_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["constants", "--n", "7", "--k", "2"]);
    let printed: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(printed, report(dir.path(), "constants"));
}

#[test]
fn out_flag_overrides_environment() {
    let env_dir = tempfile::tempdir().unwrap();
    let flag_dir = tempfile::tempdir().unwrap();
    let out = run(env_dir.path(), &["constants", "--out", flag_dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(flag_dir.path().join("constants.json").exists());
    assert!(!env_dir.path().join("constants.json").exists());
}

#[test]
fn invalid_configurations_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(dir.path(), &["constants", "--n", "4", "--k", "2"]).status.code(), Some(2));
    assert_eq!(run(dir.path(), &["residual", "--mu", "1.5"]).status.code(), Some(2));
    assert_eq!(run(dir.path(), &["residual", "--model", "torus"]).status.code(), Some(2));
    assert_eq!(run(dir.path(), &["energy-scan", "--d", "5..2"]).status.code(), Some(2));
    assert_eq!(run(dir.path(), &["homology", "--model", "circle", "--d", "3"]).status.code(), Some(2));
    assert_eq!(run(dir.path(), &["frobnicate"]).status.code(), Some(2));
    let v = report(dir.path(), "homology");
    assert!(v["report"]["error"].as_str().is_some());
}

#[test]
fn help_exits_0() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(dir.path(), &["--help"]).status.code(), Some(0));
}

#[test]
fn homology_of_sphere2() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["homology", "--model", "sphere2", "--d", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let v = report(dir.path(), "homology");
    let betti: Vec<u64> = v["report"]["betti"].as_array().unwrap().iter().map(|b| b.as_u64().unwrap()).collect();
    assert_eq!(betti, vec![1, 0, 1]);
    let list = std::fs::read_to_string(dir.path().join("homology_complex.txt")).unwrap();
    assert!(list.starts_with("vertices 6"));
}

#[test]
fn homology_relative_class_on_circle() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["homology", "--model", "circle", "--resolution", "3", "--d", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let v = report(dir.path(), "homology");
    assert!(v["report"]["relative_betti"][3].as_u64().unwrap() >= 1);
}

#[test]
fn outputs_are_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for args in [&["homology", "--model", "circle", "--d", "2"][..], &["residual", "--mu", "0.01", "--samples", "50"][..]] {
        let oa = run(a.path(), args);
        let ob = run(b.path(), args);
        assert_eq!(oa.stdout, ob.stdout);
    }
    let ra = std::fs::read(a.path().join("residual.csv")).unwrap();
    let rb = std::fs::read(b.path().join("residual.csv")).unwrap();
    assert_eq!(ra, rb);
}

#[test]
fn residual_writes_profile() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["residual", "--n", "7", "--k", "2", "--mu", "0.01", "--samples", "40"]);
    assert_eq!(out.status.code(), Some(0));
    let mut rdr = csv::Reader::from_path(dir.path().join("residual.csv")).unwrap();
    assert_eq!(
        rdr.headers().unwrap().iter().collect::<Vec<_>>(),
        vec!["schema_version", "distance", "residual", "bound", "ratio"]
    );
    assert_eq!(rdr.records().count(), 40);
    let v = report(dir.path(), "residual");
    assert!(v["report"]["core_residual_fd"].as_f64().unwrap() <= v["report"]["core_limit"].as_f64().unwrap());
}

#[test]
fn sweep_verifies_expected_slope() {
    let dir = tempfile::tempdir().unwrap();
    let base = ["sweep", "--model", "quotient", "--quantity", "self-interaction"];
    let ok = run(dir.path(), &[&base[..], &["--expect-slope", "3"]].concat());
    assert_eq!(ok.status.code(), Some(0));
    let mut rdr = csv::Reader::from_path(dir.path().join("sweep.csv")).unwrap();
    let h: Vec<String> = rdr.headers().unwrap().iter().map(String::from).collect();
    assert!(h.contains(&"error_estimate".to_string()));
    assert_eq!(rdr.records().count(), 9);

    let bad = run(dir.path(), &[&base[..], &["--expect-slope", "4"]].concat());
    assert_eq!(bad.status.code(), Some(4));
    let v = report(dir.path(), "sweep");
    assert!(v["report"]["failing_row"].as_str().unwrap().contains("slope"));
}

#[test]
fn sweep_rejects_unknown_quantity() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(dir.path(), &["sweep", "--quantity", "nope"]).status.code(), Some(2));
}

#[test]
fn interactions_with_explicit_centres() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["interactions", "--mu", "0.005", "--centers", "1,0,0,0,0,0;0,1,0,0,0,0"]);
    assert_eq!(out.status.code(), Some(0));
    let v = report(dir.path(), "interactions");
    let q = v["report"]["report"]["q"][0][1]["value"].as_f64().unwrap();
    assert!(q > 0.0);
}

#[test]
fn energy_scan_single_row() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["energy-scan", "--d", "2", "--mu-grid", "0.01"]);
    assert_eq!(out.status.code(), Some(0));
    let mut rdr = csv::Reader::from_path(dir.path().join("energy_scan.csv")).unwrap();
    let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 1);
    assert_eq!(&rows[0][1], "2");
}

#[test]
fn select_rejects_malformed_field() {
    let dir = tempfile::tempdir().unwrap();
    let field = dir.path().join("field.csv");
    std::fs::write(&field, "x0,x1,value\n1,0,2\n").unwrap();
    let out = run(dir.path(), &["select", "--field", field.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let missing = run(dir.path(), &["select", "--field", "/nonexistent/field.csv"]);
    assert_eq!(missing.status.code(), Some(2));
}
