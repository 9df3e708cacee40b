//! Cross-module consistency checks on full runs: temporal order on a
//! fixed mesh, one-step expansion of the shock path, transition counts,
//! bitwise determinism, and the on-disk output formats.

use dgft::harness::{
    convergence_study, emit_convergence, emit_outputs, run_preset_sec6, sec6_config, RateRule,
};
use dgft::timestepper::{run, tvdrk3_step};
use std::path::PathBuf;

fn tmp_dir(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

/// Halving tau on a fixed mesh divides the remaining time error by
/// about 2^3; the ratio window is wide because the error also carries
/// a fixed spatial part that the differences cancel only approximately.
#[test]
fn fixed_mesh_tau_halving_shows_third_order() {
    let h = 1.0 / 16.0;
    let taus = [1.0 / 256.0, 1.0 / 512.0, 1.0 / 1024.0, 1.0 / 2048.0];
    let xs: Vec<f64> = taus
        .iter()
        .map(|&tau| {
            let record = run_preset_sec6(h, Some(tau), 4.0).unwrap();
            assert!(record.status.is_completed());
            record.final_shock()
        })
        .collect();
    for k in 0..xs.len() - 2 {
        let ratio = (xs[k] - xs[k + 1]).abs() / (xs[k + 1] - xs[k + 2]).abs();
        assert!(
            (6.5..=10.0).contains(&ratio),
            "tau-halving ratio {ratio} at level {k} outside [6.5, 10]"
        );
    }
}

/// One step reproduces the Taylor expansion of the shock path through
/// the acceleration term.
#[test]
fn first_step_matches_the_shock_path_expansion() {
    let cfg = sec6_config(0.5, Some(0.04), 4.0).unwrap();
    let disc = cfg.build_discretization().unwrap();
    let state = cfg.build_initial_state().unwrap();
    let s0 = disc.rh_speed(&state).unwrap();
    let a0 = disc.second_time_derivative(&state, 0.0).unwrap().shock_accel;
    let next = tvdrk3_step(&disc, &state, 0.04, 1).unwrap();
    let predicted = 3.18 + 0.04 * s0 + 0.5 * 0.04 * 0.04 * a0;
    assert!((s0 - 1.054).abs() < 1e-2, "initial speed {s0}");
    assert!(
        (next.mesh.x_shock() - predicted).abs() < 1e-5,
        "x after one step {} vs expansion {predicted}",
        next.mesh.x_shock()
    );
}

#[test]
fn coarse_reference_run_shape() {
    let record = run_preset_sec6(0.5, Some(0.04), 4.0).unwrap();
    assert!(record.status.is_completed());
    assert_eq!(record.steps_completed(), 100);
    assert_eq!(record.events.len(), 8);
    assert_eq!(record.samples.len(), 101);
    assert!(record.flags.is_empty());
    assert!((record.final_state.time - 4.0).abs() < 1e-12);
    // The shock advances monotonically and events land where it crosses
    // a background boundary.
    for pair in record.samples.windows(2) {
        assert!(pair[1].x_shock > pair[0].x_shock);
    }
    for e in &record.events {
        assert_eq!(e.new_index, e.old_index + 1);
        assert!(e.measured_l1 <= e.bound);
    }
}

#[test]
fn runs_are_bitwise_deterministic() {
    let a = run_preset_sec6(0.5, Some(0.04), 4.0).unwrap();
    let b = run_preset_sec6(0.5, Some(0.04), 4.0).unwrap();
    assert_eq!(a.final_shock().to_bits(), b.final_shock().to_bits());
    for (ca, cb) in a.final_state.cells.iter().zip(&b.final_state.cells) {
        for (x, y) in ca.coeffs().iter().zip(cb.coeffs()) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }
}

#[test]
fn snapshots_sample_every_cell() {
    let mut cfg = sec6_config(0.5, Some(0.04), 4.0).unwrap();
    cfg.snapshot_times = vec![2.0, 4.0];
    let record = run(&cfg).unwrap();
    assert_eq!(record.snapshots.len(), 2);
    for snap in &record.snapshots {
        // 19 cells, 8 samples each; endpoints included per cell.
        assert_eq!(snap.points.len(), 19 * 8);
        assert!((snap.points.first().unwrap().0 - 0.0).abs() < 1e-12);
        assert!((snap.points.last().unwrap().0 - 10.0).abs() < 1e-12);
        for pair in snap.points.windows(2) {
            assert!(pair[1].0 >= pair[0].0 - 1e-12);
        }
    }
    assert!((record.snapshots[0].time - 2.0).abs() < 0.021);
    assert!((record.snapshots[1].time - 4.0).abs() < 0.021);
}

#[test]
fn emitted_files_round_trip() {
    let dir = tmp_dir("emit");
    let mut cfg = sec6_config(0.5, Some(0.04), 4.0).unwrap();
    cfg.store_spatial = true;
    cfg.temporal_stride = 1;
    cfg.snapshot_times = vec![4.0];
    let record = run(&cfg).unwrap();
    emit_outputs(&record, &dir).unwrap();
    for name in [
        "run_meta.json",
        "shock_path.csv",
        "events.csv",
        "temporal.csv",
        "indicators.csv",
        "snapshots_4.csv",
    ] {
        assert!(dir.join(name).exists(), "{name} missing");
    }
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("run_meta.json")).unwrap())
            .unwrap();
    assert_eq!(meta["transitions"], 8);
    let final_shock = meta["final_shock"].as_f64().unwrap();
    assert!((final_shock - record.final_shock()).abs() < 1e-12);

    // shock_path.csv: header plus one row per recorded step, full
    // precision round trip of the final position.
    let path = std::fs::read_to_string(dir.join("shock_path.csv")).unwrap();
    let lines: Vec<&str> = path.lines().collect();
    assert_eq!(lines.len(), 102);
    let last: Vec<&str> = lines[101].split(',').collect();
    assert_eq!(last[0], "100");
    let x: f64 = last[2].parse().unwrap();
    assert_eq!(x.to_bits(), record.final_shock().to_bits());
}

#[test]
fn convergence_csv_matches_the_table() {
    let dir = tmp_dir("conv");
    let hs = [0.5, 0.25, 0.125];
    let table = convergence_study(RateRule::T4, &hs, 4.0).unwrap();
    emit_convergence(&table, &dir).unwrap();
    let text = std::fs::read_to_string(dir.join("convergence_T4.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "h,tau,x_shock_at_T,diff,ratio");
    assert_eq!(lines.len(), 4);
    let ratios = table.ratios();
    let last: Vec<&str> = lines[3].split(',').collect();
    let ratio: f64 = last[4].parse().unwrap();
    assert!((ratio - ratios[2].unwrap()).abs() < 1e-12);
    // Rows carry the paired step sizes of the rule.
    let coarse: Vec<&str> = lines[1].split(',').collect();
    let tau: f64 = coarse[1].parse().unwrap();
    assert!((tau - 1.0 / 32.0).abs() < 1e-15);
}
