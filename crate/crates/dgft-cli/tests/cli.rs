//! Black-box tests of the dgft binary: exit codes, output files, and
//! reproducibility of the emitted data.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dgft"))
}

fn tmp(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    if dir.exists() {
        std::fs::remove_dir_all(&dir).unwrap();
    }
    dir
}

fn run_ok(args: &[&str]) -> Output {
    let out = bin().args(args).output().unwrap();
    assert_eq!(
        out.status.code(),
        Some(0),
        "expected success, got {:?}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn meta(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("run_meta.json")).unwrap()).unwrap()
}

#[test]
fn preset_run_reproduces_the_benchmark_position() {
    let dir = tmp("preset_run");
    run_ok(&[
        "run", "--preset", "sec6", "--h", "1/2", "--tau", "1/25",
        "--out", dir.to_str().unwrap(),
    ]);
    let m = meta(&dir);
    assert_eq!(m["status"]["kind"], "completed");
    assert_eq!(m["transitions"], 8);
    assert_eq!(m["steps_completed"], 100);
    let x = m["final_shock"].as_f64().unwrap();
    assert!(
        (x - 7.353087035710600).abs() < 1e-12,
        "final shock {x}"
    );
    let events = std::fs::read_to_string(dir.join("events.csv")).unwrap();
    assert_eq!(events.lines().count(), 9); // header + 8 transitions
    let path = std::fs::read_to_string(dir.join("shock_path.csv")).unwrap();
    assert_eq!(path.lines().count(), 102); // header + steps 0..=100
}

#[test]
fn rerunning_emits_identical_bytes() {
    let (d1, d2) = (tmp("repro_a"), tmp("repro_b"));
    for d in [&d1, &d2] {
        run_ok(&[
            "run", "--preset", "sec6", "--h", "1/2", "--tau", "1/25",
            "--out", d.to_str().unwrap(),
        ]);
    }
    for name in ["shock_path.csv", "events.csv"] {
        let a = std::fs::read(d1.join(name)).unwrap();
        let b = std::fs::read(d2.join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between reruns");
    }
}

#[test]
fn config_file_runs_and_flags_override() {
    let dir = tmp("config_run");
    let cfg_path = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("small.json");
    std::fs::write(
        &cfg_path,
        r#"{
            "cells": 20,
            "flux": "burgers",
            "initial": {"preset": "sec6"},
            "end_time": 2.0,
            "policy": {"tau": 0.04}
        }"#,
    )
    .unwrap();
    run_ok(&[
        "run", "--config", cfg_path.to_str().unwrap(),
        "--t-end", "1", "--out", dir.to_str().unwrap(),
    ]);
    let m = meta(&dir);
    assert_eq!(m["status"]["kind"], "completed");
    assert_eq!(m["config"]["end_time"], 1.0);
    assert_eq!(m["steps_completed"], 25);

    // --h only applies to preset runs.
    let out = bin()
        .args(["run", "--config", cfg_path.to_str().unwrap(), "--h", "1/4"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn configuration_errors_exit_with_code_2() {
    for args in [
        &["run", "--preset", "sec6"] as &[&str],
        &["run", "--preset", "unknown", "--h", "1/2"],
        &["run"],
        &["sweep", "--hmin", "1/100", "--hmax", "1/90"],
    ] {
        let out = bin().args(args).output().unwrap();
        assert_eq!(out.status.code(), Some(2), "args {args:?}");
        assert!(!out.stderr.is_empty());
    }
    let bad = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("bad.json");
    std::fs::write(&bad, "{\"cells\": \"many\"}").unwrap();
    let out = bin()
        .args(["run", "--config", bad.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn blowup_exits_with_code_3_and_partial_outputs() {
    let dir = tmp("blowup");
    // h/10 violates the strengthened step-size condition; the run is
    // expected to fail and still leave its partial records behind.
    let out = bin()
        .args([
            "run", "--preset", "sec6", "--h", "1/32", "--tau", "1/320",
            "--out", dir.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    let m = meta(&dir);
    assert_eq!(m["status"]["kind"], "failed");
    assert!(dir.join("shock_path.csv").exists());
    assert!(dir.join("flags.csv").exists());
}

#[test]
fn indicators_subcommand_records_full_reports() {
    let dir = tmp("indicators");
    run_ok(&[
        "indicators", "--preset", "sec6", "--h", "1/2", "--tau", "1/25",
        "--out", dir.to_str().unwrap(),
    ]);
    let ind = std::fs::read_to_string(dir.join("indicators.csv")).unwrap();
    let mut lines = ind.lines();
    assert_eq!(
        lines.next().unwrap(),
        "step,t,boundary_x,M0,M1,M2,M3,D0,D1,D2,D3,logJ0,logJ1,logJ2,logJ3"
    );
    assert!(lines.count() > 100);
    let temporal = std::fs::read_to_string(dir.join("temporal.csv")).unwrap();
    assert_eq!(temporal.lines().next().unwrap(), "step,t,order,x_s_deriv,u_maxnorm");
    // 101 recorded steps, orders 0..=4 each.
    assert_eq!(temporal.lines().count(), 1 + 101 * 5);
}

#[test]
fn sweep_writes_the_convergence_table() {
    let dir = tmp("sweep");
    let out = run_ok(&[
        "sweep", "--rule", "T4", "--hmin", "1/4", "--hmax", "1/2",
        "--out", dir.to_str().unwrap(),
    ]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("rule T4"), "stdout: {stdout}");
    let csv = std::fs::read_to_string(dir.join("convergence_T4.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3); // header + two widths
}

#[test]
fn scenario_reports_detection_and_recovery() {
    let dir = tmp("scenario");
    run_ok(&["scenario", "--out", dir.to_str().unwrap()]);
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("scenario.json")).unwrap())
            .unwrap();
    assert!(summary["first_flag_step"].as_u64().unwrap() <= 5);
    assert!(summary["amplification"].as_f64().unwrap() >= 10.0);
    assert_eq!(summary["flags_after_switch"], 0);
    assert_eq!(summary["recovered"], true);
    for sub in ["stable", "unstable", "recovery"] {
        assert!(dir.join(sub).join("run_meta.json").exists());
    }
    assert_eq!(meta(&dir.join("unstable"))["status"]["kind"], "failed");
}
