//! The binary's contract: exit codes, report files, reproducibility.

use std::path::Path;
use std::process::{Command, Output};

fn gauge_lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gauge-lab"))
        .args(args)
        .env_remove("GIL_SEED")
        .output()
        .unwrap()
}

fn report(dir: &Path, name: &str) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join(name)).unwrap()).unwrap()
}

#[test]
fn integrate_reproduces_block_values() {
    let dir = tempfile::tempdir().unwrap();
    let out = gauge_lab(
        &[
            "integrate",
            "--fn",
            "3g",
            "--R",
            "8",
            "--tol",
            "2^-12",
            "--seed",
            "7",
            "--out",
        ]
        .into_iter()
        .chain([dir.path().to_str().unwrap()])
        .collect::<Vec<_>>(),
    );
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let r = report(dir.path(), "integrate.json");
    assert_eq!(r["schema"], "gauge-lab/1");
    assert_eq!(r["config"]["seed"], 7);
    assert_eq!(r["result"]["estimate"]["status"], "converged");
    assert!(dir.path().join("integrate-trace.csv").exists());
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        &["integrate", "--fn", "nosuch"][..],
        &["nosuch"],
        &["integrate", "--tol", "3"],
        &["integrate", "--R", "0"],
        &["lln", "--fn", "identity"],
        &["gallery", "3x"],
        &[
            "stability",
            "--seed",
            "1",
            "--alpha",
            "0.8",
            "--beta",
            "0.2",
        ],
    ] {
        let out = gauge_lab(args);
        assert_eq!(
            out.status.code(),
            Some(2),
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn failed_checks_exit_one_with_report() {
    let out = gauge_lab(&["vitali", "--fn", "counter", "--deterministic"]);
    assert_eq!(out.status.code(), Some(1));
    let r: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["pass"], false);
    assert!(!r["result"]["report"]["violations"]
        .as_array()
        .unwrap()
        .is_empty());
}

#[test]
fn deterministic_runs_are_byte_identical() {
    let args = [
        "lln",
        "--fn",
        "3g",
        "--seed",
        "5",
        "--n",
        "2000",
        "--batches",
        "20",
        "--deterministic",
    ];
    let a = gauge_lab(&args);
    let b = gauge_lab(&[&args[..], &["--threads", "1"]].concat());
    assert_eq!(a.status.code(), Some(0));
    let strip = |o: &Output| {
        let mut v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
        v["config"]["threads"] = serde_json::Value::Null;
        serde_json::to_string(&v).unwrap()
    };
    assert_eq!(strip(&a), strip(&b));
    assert_eq!(a.stdout, gauge_lab(&args).stdout);
    assert!(!String::from_utf8_lossy(&a.stdout).contains("generated_at"));
}

#[test]
fn config_file_and_env_seed_resolve() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(
        &cfg,
        r#"{"fn": "identity", "n": 1000, "batches": 10, "seed": 3}"#,
    )
    .unwrap();
    let out = gauge_lab(&[
        "lln",
        "--config",
        cfg.to_str().unwrap(),
        "--batches",
        "12",
        "--deterministic",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let r: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["config"]["batches"], 12);
    assert_eq!(r["config"]["seed"], 3);
    assert_eq!(r["config"]["fn"], "identity");

    let out = Command::new(env!("CARGO_BIN_EXE_gauge-lab"))
        .args([
            "lln",
            "--fn",
            "identity",
            "--n",
            "1000",
            "--batches",
            "10",
            "--deterministic",
        ])
        .env("GIL_SEED", "9")
        .output()
        .unwrap();
    let r: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["config"]["seed"], 9);

    std::fs::write(&cfg, r#"{"nosuch": 1}"#).unwrap();
    assert_eq!(
        gauge_lab(&["integrate", "--config", cfg.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn report_command_rechecks_saved_reports() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    assert_eq!(
        gauge_lab(&["gallery", "3g", "--out", d]).status.code(),
        Some(0)
    );
    let saved = dir.path().join("gallery-3g.json");
    assert_eq!(
        gauge_lab(&["report", saved.to_str().unwrap()])
            .status
            .code(),
        Some(0)
    );
    let bogus = dir.path().join("bogus.json");
    std::fs::write(&bogus, r#"{"schema": "other"}"#).unwrap();
    assert_eq!(
        gauge_lab(&["report", bogus.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
}
