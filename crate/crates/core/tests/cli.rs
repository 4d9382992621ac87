use std::process::Command;

mod common;

fn fracfv() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fracfv"))
}

#[test]
fn run_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = fracfv()
        .args(["run", "1.1", "--resolution", "8", "--elim", "schur", "--threads", "2", "--out"])
        .arg(dir.path())
        .args(["--override", "k_v=1e-3"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("condition full"));
    let report = std::fs::read_to_string(dir.path().join("report.json")).unwrap();
    let json: serde_json::Value = serde_json::from_str(&report).unwrap();
    assert_eq!(json["parameters"]["k_v"], 1e-3);
    assert_eq!(json["spec"]["elimination"], "schur");
}

#[test]
fn usage_errors_exit_64() {
    for args in [
        vec!["run", "7"],
        vec!["run", "1.1", "--disc", "fem"],
        vec!["run", "1.1", "--override", "k_v"],
        vec!["run", "1.1", "--override", "unknown=1"],
        vec!["frobnicate"],
    ] {
        let out = fracfv().args(&args).output().unwrap();
        assert_eq!(out.status.code(), Some(64), "{args:?}");
    }
    assert_eq!(fracfv().arg("--help").output().unwrap().status.code(), Some(0));
}

#[test]
fn validate_mesh() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.mesh");
    std::fs::write(&good, common::triangle_document(3)).unwrap();
    let out = fracfv().arg("validate-mesh").arg(&good).output().unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8(out.stdout).unwrap().contains("cells 18"));

    let bad = dir.path().join("bad.mesh");
    std::fs::write(&bad, common::triangle_document(3).replace("cells 18", "cells 19")).unwrap();
    let out = fracfv().arg("validate-mesh").arg(&bad).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn assembly_failure_exit_code() {
    let out = fracfv().args(["run", "4", "--elim", "star_delta"]).output().unwrap();
    assert_eq!(out.status.code(), Some(3));
}
