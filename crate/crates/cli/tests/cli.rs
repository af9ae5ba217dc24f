use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::{Duration, Instant};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_cocycle-lab"));
    c.env_remove("COCYCLE_LAB_WORKERS");
    c
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run_ok(args: &[&str]) -> Output {
    let out = bin().args(args).output().expect("binary runs");
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn report(dir: &Path) -> serde_json::Value {
    serde_json::from_slice(&std::fs::read(dir.join("report.json")).unwrap()).unwrap()
}

#[test]
fn every_shipped_config_validates() {
    let mut seen = 0;
    for entry in std::fs::read_dir(configs()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "json") {
            let out = run_ok(&["validate", "--config", path.to_str().unwrap()]);
            let stdout = String::from_utf8_lossy(&out.stdout);
            assert!(
                stdout.contains("0 error(s)"),
                "{}: {stdout}",
                path.display()
            );
            seen += 1;
        }
    }
    assert!(seen >= 7);
}

#[test]
fn invalid_markov_rows_exit_with_code_two() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("bad.json");
    std::fs::write(
        &path,
        r#"{
  "schema_version": 1,
  "master_seed": 1,
  "system": {"kind": "markov_shift", "transition": [[0.5, 0.4], [0.5, 0.5]], "stationary": [0.5, 0.5]},
  "cocycle": {"base": {"kind": "lattice_step", "steps": [[1.0], [-1.0]]}}
}"#,
    )
    .unwrap();
    let out = bin()
        .args(["validate", "--config", path.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
    let out = bin()
        .args(["estimate", "--config", path.to_str().unwrap()])
        .arg("--out")
        .arg(tmp.path().join("run"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_config_keys_are_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("typo.json");
    std::fs::write(
        &path,
        r#"{"schema_version": 1, "master_seed": 1, "sytem": {}, "cocycle": {"base": {"kind": "constant", "value": [1.0]}}}"#,
    )
    .unwrap();
    let out = bin()
        .args(["validate", "--config", path.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn constant_drift_override_is_transient() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = configs().join("suite_theorem3.json");
    run_ok(&[
        "suite",
        "theorem3",
        "--config",
        cfg.to_str().unwrap(),
        "--override",
        "cocycle=constant:1",
        "--out",
        tmp.path().to_str().unwrap(),
    ]);
    let r = report(tmp.path());
    assert_eq!(r["result"]["conclusion"], "transient");
    assert_eq!(r["config"]["cocycle"]["base"]["kind"], "constant");
}

#[test]
fn reports_are_byte_identical_across_runs_and_workers() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = configs().join("estimate_srw1.json");
    let mut bytes = Vec::new();
    for (i, workers) in ["1", "2", "2"].iter().enumerate() {
        let dir = tmp.path().join(i.to_string());
        run_ok(&[
            "estimate",
            "--config",
            cfg.to_str().unwrap(),
            "--workers",
            workers,
            "--out",
            dir.to_str().unwrap(),
        ]);
        bytes.push(std::fs::read(dir.join("report.json")).unwrap());
        let manifest: serde_json::Value =
            serde_json::from_slice(&std::fs::read(dir.join("manifest.json")).unwrap()).unwrap();
        assert_eq!(manifest["workers"].to_string(), *workers);
        assert_eq!(manifest["config_hash"].as_str().unwrap().len(), 64);
    }
    assert_eq!(bytes[0], bytes[1]);
    assert_eq!(bytes[1], bytes[2]);
    let names: Vec<_> = std::fs::read_dir(tmp.path().join("0/curves"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    assert!(!names.is_empty());
    for p in names {
        let text = std::fs::read_to_string(&p).unwrap();
        assert!(
            text.lines().next().unwrap().contains(','),
            "{}",
            p.display()
        );
    }
}

#[test]
fn seed_flag_and_env_workers_are_honoured() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = configs().join("estimate_srw1.json");
    let a = tmp.path().join("a");
    let out = bin()
        .env("COCYCLE_LAB_WORKERS", "1")
        .args(["estimate", "--config", cfg.to_str().unwrap(), "--seed", "7"])
        .arg("--override")
        .arg("estimate.m=200")
        .arg("--out")
        .arg(&a)
        .output()
        .unwrap();
    assert!(out.status.success());
    let manifest: serde_json::Value =
        serde_json::from_slice(&std::fs::read(a.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["workers"], 1);
    assert_eq!(report(&a)["master_seed"], 7);
    assert_eq!(report(&a)["config"]["estimate"]["m"], 200);
}

#[test]
fn missing_config_is_a_usage_error() {
    let out = bin().args(["estimate"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = bin()
        .args(["suite", "no_such_suite", "--config"])
        .arg(configs().join("suite_theorem3.json"))
        .arg("--out")
        .arg(tempfile::tempdir().unwrap().path())
        .output()
        .unwrap();
    assert!(!out.status.success());
}

#[test]
fn selftest_passes_within_five_minutes() {
    let tmp = tempfile::tempdir().unwrap();
    let start = Instant::now();
    let out = run_ok(&["selftest", "--out", tmp.path().to_str().unwrap()]);
    assert!(start.elapsed() < Duration::from_secs(300));
    let r = report(tmp.path());
    let checks = r["result"]["checks"].as_array().expect("checks listed");
    assert!(
        checks.iter().all(|c| c["passed"] == true),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );
}
