//! Experiment driver: the bundled benchmark preset, convergence sweeps
//! over mesh/step pairs, the anti-smoothing scenario, and CSV/JSON
//! emission of run records.

use crate::config::{RunConfig, TauSwitch};
use crate::error::{Error, Result};
use crate::record::{RunRecord, RunStatus};
use crate::smoothness::jump_orders;
use crate::timestepper::run;
use rayon::prelude::*;
use serde::Serialize;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

/// The four named step-size rules of the convergence study.
///
/// T1: tau ~ h^(4/3)/10 (strengthened CFL, optimal rate)
/// T2: tau ~ h^(4/3)/8
/// T3: tau ~ h^(7/6)/10 (weaker exponent)
/// T4: tau = h/16 (standard CFL only, degraded rate)
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateRule {
    T1,
    T2,
    T3,
    T4,
}

impl std::str::FromStr for RateRule {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "T1" => Ok(RateRule::T1),
            "T2" => Ok(RateRule::T2),
            "T3" => Ok(RateRule::T3),
            "T4" => Ok(RateRule::T4),
            other => Err(Error::Config(format!(
                "unknown rule '{other}', expected T1|T2|T3|T4"
            ))),
        }
    }
}

impl std::fmt::Display for RateRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            RateRule::T1 => "T1",
            RateRule::T2 => "T2",
            RateRule::T3 => "T3",
            RateRule::T4 => "T4",
        })
    }
}

/// The published step sizes per rule, as (1/h, 1/tau) pairs.
///
/// These are hand-picked reciprocals-of-integers near the rule formula,
/// not its exact values, so they are stored verbatim; mesh widths
/// outside the table fall back to the formula.
fn tabulated_tau(rule: RateRule, h: f64) -> Option<f64> {
    let table: &[(u32, u32)] = match rule {
        RateRule::T1 => &[(2, 25), (4, 64), (8, 160), (16, 400), (32, 1024), (64, 2560)],
        RateRule::T2 => &[(2, 20), (4, 50), (8, 128), (16, 320), (32, 800), (64, 2048)],
        RateRule::T3 => &[(2, 20), (4, 48), (8, 112), (16, 256), (32, 576), (64, 1280)],
        RateRule::T4 => &[(2, 32), (4, 64), (8, 128), (16, 256), (32, 512), (64, 1024)],
    };
    let inv = 1.0 / h;
    table
        .iter()
        .find(|(hi, _)| (inv - *hi as f64).abs() < 1e-9 * inv)
        .map(|(_, ti)| 1.0 / *ti as f64)
}

/// Step size for a rule at mesh width h (table first, formula fallback).
pub fn rule_tau(rule: RateRule, h: f64) -> f64 {
    if let Some(tau) = tabulated_tau(rule, h) {
        return tau;
    }
    let raw = match rule {
        RateRule::T1 => h.powf(4.0 / 3.0) / 10.0,
        RateRule::T2 => h.powf(4.0 / 3.0) / 8.0,
        RateRule::T3 => h.powf(7.0 / 6.0) / 10.0,
        RateRule::T4 => h / 16.0,
    };
    // Round down to a reciprocal of an integer, as the tables do.
    1.0 / (1.0 / raw * (1.0 - 1e-12)).ceil()
}

/// The mesh widths used by the published tables.
pub fn default_h_list() -> Vec<f64> {
    (1..=6).map(|k| 1.0 / f64::from(1u32 << k)).collect()
}

/// Benchmark configuration: domain (0,10), 10/h background cells,
/// Burgers flux, the sin^4-into-sine initial data with the shock at
/// 3.18, inflow 1.2.
pub fn sec6_config(h: f64, tau: Option<f64>, t_end: f64) -> Result<RunConfig> {
    RunConfig::sec6(h, tau, t_end)
}

/// One full benchmark run.
pub fn run_preset_sec6(h: f64, tau: Option<f64>, t_end: f64) -> Result<RunRecord> {
    run(&sec6_config(h, tau, t_end)?)
}

#[derive(Debug, Clone)]
pub struct ConvergenceRow {
    pub h: f64,
    pub cells: usize,
    pub tau: f64,
    pub steps: usize,
    pub x_shock: f64,
    pub transitions: usize,
    pub status: String,
}

#[derive(Debug, Clone)]
pub struct ConvergenceTable {
    pub rule: RateRule,
    pub end_time: f64,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceTable {
    /// Successive differences |x(h_k) - x(h_(k-1))|; None where either
    /// endpoint is missing (first row, failed runs).
    pub fn differences(&self) -> Vec<Option<f64>> {
        let mut out = vec![None; self.rows.len()];
        for k in 1..self.rows.len() {
            let (a, b) = (self.rows[k - 1].x_shock, self.rows[k].x_shock);
            if a.is_finite() && b.is_finite() {
                out[k] = Some((b - a).abs());
            }
        }
        out
    }

    /// Ratios of successive differences (the observed-rate column).
    pub fn ratios(&self) -> Vec<Option<f64>> {
        let d = self.differences();
        let mut out = vec![None; self.rows.len()];
        for k in 1..d.len() {
            if let (Some(prev), Some(cur)) = (d[k - 1], d[k]) {
                if cur > 0.0 {
                    out[k] = Some(prev / cur);
                }
            }
        }
        out
    }
}

/// Run the benchmark over a list of mesh widths under one step rule.
///
/// Rows run in parallel (they share nothing) and are assembled in the
/// given order. A failed run keeps its row with NaN in the position
/// column and the failure message in the status column.
pub fn convergence_study(rule: RateRule, h_list: &[f64], t_end: f64) -> Result<ConvergenceTable> {
    if h_list.is_empty() {
        return Err(Error::Config("empty mesh-width list".into()));
    }
    let rows: Vec<ConvergenceRow> = h_list
        .par_iter()
        .map(|&h| -> Result<ConvergenceRow> {
            let tau = rule_tau(rule, h);
            let mut cfg = sec6_config(h, Some(tau), t_end)?;
            cfg.spatial_stride = 0;
            cfg.temporal_stride = 0;
            let record = run(&cfg)?;
            let status = match &record.status {
                RunStatus::Completed => "completed".to_string(),
                RunStatus::ShockReachedOutflow { step } => {
                    format!("shock reached the outflow region at step {step}")
                }
                RunStatus::Failed { step, message } => format!("failed at step {step}: {message}"),
            };
            Ok(ConvergenceRow {
                h,
                cells: cfg.cells,
                tau,
                steps: record.steps_completed(),
                x_shock: if record.status.is_completed() {
                    record.final_shock()
                } else {
                    f64::NAN
                },
                transitions: record.events.len(),
                status,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceTable {
        rule,
        end_time: t_end,
        rows,
    })
}

/// Report of the three-run anti-smoothing experiment.
#[derive(Debug)]
pub struct ScenarioReport {
    /// tau = h/20 throughout: the well-behaved baseline.
    pub stable: RunRecord,
    /// tau = h/10: violates the strengthened CFL condition.
    pub unstable: RunRecord,
    /// tau = h/10 until step 4, then h/20: the rescue variant.
    pub recovery: RunRecord,
    pub first_flag_step: Option<usize>,
    /// max |D^0| of the unstable run through step 24, over the stable
    /// run's all-step maximum.
    pub amplification: f64,
    pub flags_after_switch: usize,
    pub recovered: bool,
}

/// The instability experiment at h = 1/32.
///
/// Phase 1 integrates with tau = 1/320 = h/10, which satisfies the
/// standard CFL condition but not the strengthened one; the detector
/// watches the scaled jumps every step. Phase 2 reruns with the step
/// size switched to h/20 from step 4 on. The stable baseline calibrates
/// how large |D^0| is allowed to be. The admissible interval is padded
/// wider than usual (margin 0.4) so phase 1 can oscillate long enough
/// to be measured instead of aborting at the first overshoot; a blowup
/// after the flag is expected and recorded, not an error.
pub fn run_anti_smoothing_scenario() -> Result<ScenarioReport> {
    let h = 1.0 / 32.0;
    let margin = 0.4;
    let mut stable_cfg = sec6_config(h, Some(h / 20.0), 4.0)?;
    stable_cfg.admissible_margin = margin;
    let mut unstable_cfg = sec6_config(h, Some(h / 10.0), 4.0)?;
    unstable_cfg.admissible_margin = margin;
    let mut recovery_cfg = unstable_cfg.clone();
    recovery_cfg.tau_switch = Some(TauSwitch {
        at_step: 4,
        tau: h / 20.0,
    });

    let stable = run(&stable_cfg)?;
    let unstable = run(&unstable_cfg)?;
    let recovery = run(&recovery_cfg)?;

    let first_flag_step = unstable.first_flag_step();
    let stable_max = stable.max_abs_d0();
    let amplification = if stable_max > 0.0 {
        unstable.max_abs_d0_through(24) / stable_max
    } else {
        f64::INFINITY
    };
    let flags_after_switch = recovery.flags.iter().filter(|f| f.step > 4).count();
    let recovered = recovery.status.is_completed() && flags_after_switch == 0;
    Ok(ScenarioReport {
        stable,
        unstable,
        recovery,
        first_flag_step,
        amplification,
        flags_after_switch,
        recovered,
    })
}

/// 17 significant digits, enough to reproduce any f64 exactly.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.filter(|v| v.is_finite()).map(fmt_float).unwrap_or_default()
}

fn fmt_or_empty(x: f64) -> String {
    fmt_opt(Some(x))
}

/// Time tag for snapshot file names: integral times drop the fraction.
fn fmt_time_tag(t: f64) -> String {
    if (t - t.round()).abs() < 1e-9 && t.abs() < 1e15 {
        format!("{}", t.round() as i64)
    } else {
        format!("{t}")
    }
}

fn create(path: &Path) -> Result<std::io::BufWriter<std::fs::File>> {
    let file = std::fs::File::create(path).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        ))
    })?;
    Ok(std::io::BufWriter::new(file))
}

#[derive(Serialize)]
struct MetaOut<'a> {
    config: &'a RunConfig,
    beta: f64,
    segments: &'a [crate::record::Segment],
    status: &'a RunStatus,
    steps_completed: usize,
    final_time: f64,
    final_shock: f64,
    transitions: usize,
    first_flag_step: Option<usize>,
    flag_count: usize,
    wall_seconds: f64,
}

/// Write run_meta.json, shock_path.csv, events.csv, and (when present)
/// temporal.csv, indicators.csv, and one snapshots_{t}.csv per stored
/// snapshot, into `dir`.
pub fn emit_outputs(record: &RunRecord, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", dir.display()),
        ))
    })?;

    let meta = MetaOut {
        config: &record.config,
        beta: record.beta,
        segments: &record.segments,
        status: &record.status,
        steps_completed: record.steps_completed(),
        final_time: record.final_state.time,
        final_shock: record.final_shock(),
        transitions: record.events.len(),
        first_flag_step: record.first_flag_step(),
        flag_count: record.flags.len(),
        wall_seconds: record.wall_seconds,
    };
    let mut w = create(&dir.join("run_meta.json"))?;
    serde_json::to_writer_pretty(&mut w, &meta)?;
    w.write_all(b"\n")?;

    let mut w = create(&dir.join("shock_path.csv"))?;
    writeln!(w, "step,t,x_sc,rh_speed,shock_height")?;
    for s in &record.samples {
        writeln!(
            w,
            "{},{},{},{},{}",
            s.step,
            fmt_float(s.time),
            fmt_float(s.x_shock),
            fmt_float(s.speed),
            fmt_float(s.height)
        )?;
    }

    let mut w = create(&dir.join("events.csv"))?;
    writeln!(w, "step,time,old_i,new_i,measured_L1_error,bound")?;
    for e in &record.events {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            e.step,
            fmt_float(e.time),
            e.old_index,
            e.new_index,
            fmt_float(e.measured_l1),
            fmt_float(e.bound)
        )?;
    }

    if !record.flags.is_empty() {
        let mut w = create(&dir.join("flags.csv"))?;
        writeln!(w, "step,time,boundary,order,values")?;
        for f in &record.flags {
            let vals: Vec<String> = f.values.iter().map(|v| format!("{v:.6e}")).collect();
            writeln!(
                w,
                "{},{},{},{},{}",
                f.step,
                fmt_float(f.time),
                f.boundary,
                f.order,
                vals.join(";")
            )?;
        }
    }

    if !record.temporal.is_empty() {
        let mut w = create(&dir.join("temporal.csv"))?;
        writeln!(w, "step,t,order,x_s_deriv,u_maxnorm")?;
        for t in &record.temporal {
            for l in 0..=t.orders {
                writeln!(
                    w,
                    "{},{},{},{},{}",
                    t.step,
                    fmt_float(t.time),
                    l,
                    fmt_float(t.shock[l]),
                    fmt_float(t.max_norm[l])
                )?;
            }
        }
    }

    if !record.spatial_full.is_empty() {
        let p = record.config.degree;
        let h = record.config.h();
        let mut header = String::from("step,t,boundary_x");
        for tag in ["M", "D", "logJ"] {
            for l in 0..=p {
                let _ = write!(header, ",{tag}{l}");
            }
        }
        let mut w = create(&dir.join("indicators.csv"))?;
        writeln!(w, "{header}")?;
        for ind in &record.spatial_full {
            let orders = jump_orders(ind, h)?;
            let empty_tail = ",".repeat(p + 1);
            let mut shock_pending = true;
            let emit_shock = |w: &mut dyn std::io::Write| -> Result<()> {
                let mut line = format!("{},{},{}", ind.step, fmt_float(ind.time), fmt_float(ind.shock_x));
                for l in 0..=p {
                    let _ = write!(line, ",{}", fmt_float(ind.shock_m[l]));
                }
                writeln!(w, "{line}{empty_tail}{empty_tail}")?;
                Ok(())
            };
            for (row, ords) in ind.rows.iter().zip(&orders) {
                if shock_pending && row.x > ind.shock_x {
                    emit_shock(&mut w)?;
                    shock_pending = false;
                }
                let mut line = format!("{},{},{}", ind.step, fmt_float(ind.time), fmt_float(row.x));
                for l in 0..=p {
                    let _ = write!(line, ",{}", fmt_or_empty(row.m[l]));
                }
                for l in 0..=p {
                    let _ = write!(line, ",{}", fmt_or_empty(row.d[l]));
                }
                for l in 0..=p {
                    let _ = write!(line, ",{}", fmt_opt(ords[l]));
                }
                writeln!(w, "{line}")?;
            }
            if shock_pending {
                emit_shock(&mut w)?;
            }
        }
    }

    for snap in &record.snapshots {
        let name = format!("snapshots_{}.csv", fmt_time_tag(snap.time));
        let mut w = create(&dir.join(name))?;
        writeln!(w, "x,u")?;
        for (x, u) in &snap.points {
            writeln!(w, "{},{}", fmt_float(*x), fmt_float(*u))?;
        }
    }
    Ok(())
}

/// Write convergence_{rule}.csv: one row per mesh width, with the
/// difference and ratio columns recomputed from the positions (empty
/// cells where undefined).
pub fn emit_convergence(table: &ConvergenceTable, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", dir.display()),
        ))
    })?;
    let diffs = table.differences();
    let ratios = table.ratios();
    let mut w = create(&dir.join(format!("convergence_{}.csv", table.rule)))?;
    writeln!(w, "h,tau,x_shock_at_T,diff,ratio")?;
    for (k, row) in table.rows.iter().enumerate() {
        writeln!(
            w,
            "{},{},{},{},{}",
            fmt_float(row.h),
            fmt_float(row.tau),
            fmt_or_empty(row.x_shock),
            fmt_opt(diffs[k]),
            fmt_opt(ratios[k])
        )?;
    }
    Ok(())
}
