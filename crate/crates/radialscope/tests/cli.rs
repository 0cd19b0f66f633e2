use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn examples() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs/examples")
}

fn radialscope(args: &[&str], config: &Path, out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_radialscope"))
        .args(args)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

#[test]
fn analyze_succeeds_and_writes_report() {
    let out = tempfile::tempdir().unwrap();
    let o = radialscope(&["analyze"], &examples().join("single_minimum.json"), out.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value =
        serde_json::from_slice(&std::fs::read(out.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["provenance"]["command"], "analyze");
    assert!(out.path().join("radial_points.csv").exists());
}

#[test]
fn invalid_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("empty.json");
    std::fs::write(&cfg, r#"{"mode": "abstract", "criticalPoints": [], "energy": {"sigma": 1}}"#).unwrap();
    let o = radialscope(&["normal-form"], &cfg, &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unknown_field_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("typo.json");
    std::fs::write(
        &cfg,
        r#"{"mode": "abstract", "criticalPoints": [{"label": "z", "value": 0, "hessian": [1]}], "energy": {"sigma": 3}, "sigmas": 1}"#,
    )
    .unwrap();
    let o = radialscope(&["normal-form"], &cfg, &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn threshold_energy_exits_3_with_evidence() {
    let out = tempfile::tempdir().unwrap();
    let o = radialscope(&["normal-form", "--sigma", "3/4"], &examples().join("single_minimum.json"), out.path());
    assert_eq!(o.status.code(), Some(3));
    let stderr = String::from_utf8_lossy(&o.stderr);
    assert!(stderr.contains("forbidden energy"), "{stderr}");
}

#[test]
fn sigma_override_changes_energy() {
    let out = tempfile::tempdir().unwrap();
    let o = radialscope(&["normal-form", "--sigma", "4", "--format", "json"], &examples().join("single_minimum.json"), out.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value =
        serde_json::from_slice(&std::fs::read(out.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["perEnergy"][0]["sigma"], "4/1");
    assert!(!out.path().join("radial_points.csv").exists());
}
