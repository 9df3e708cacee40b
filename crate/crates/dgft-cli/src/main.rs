//! Command-line harness for the dgft solver: single runs, convergence
//! sweeps, the anti-smoothing scenario, and indicator-focused runs.
//!
//! Exit codes: 0 on success, 2 on configuration errors, 3 when a
//! simulation ends in blowup or another numerical failure (partial
//! outputs are written first), 1 for environment errors such as
//! unwritable output directories.

use clap::{Args, Parser, Subcommand};
use dgft::config::RunConfig;
use dgft::harness::{
    convergence_study, default_h_list, emit_convergence, emit_outputs,
    run_anti_smoothing_scenario, RateRule,
};
use dgft::record::{RunRecord, RunStatus};
use dgft::Error;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "dgft",
    version,
    about = "Shock-tracking discontinuous Galerkin solver for 1D scalar conservation laws"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Integrate one configuration and write its outputs.
    Run(RunArgs),
    /// Convergence study over a ladder of mesh widths under one step rule.
    Sweep(SweepArgs),
    /// The three-run anti-smoothing experiment (stable / unstable / recovery).
    Scenario(OutArg),
    /// Single run with full per-step indicator recording.
    Indicators(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON configuration file.
    #[arg(long, value_name = "PATH", conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Bundled benchmark configuration (only "sec6").
    #[arg(long, value_name = "NAME")]
    preset: Option<String>,
    /// Mesh width, as a decimal or a fraction like 1/32 (preset only).
    #[arg(long, value_parser = parse_ratio)]
    h: Option<f64>,
    /// Step size override, decimal or fraction like 1/1024.
    #[arg(long, value_parser = parse_ratio)]
    tau: Option<f64>,
    /// End time (default 4 for the preset).
    #[arg(long = "t-end", value_parser = parse_ratio)]
    t_end: Option<f64>,
    /// Output directory.
    #[arg(long, value_name = "DIR", default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    /// Step-size rule: T1, T2, T3, or T4.
    #[arg(long, default_value = "T1", value_parser = parse_rule)]
    rule: RateRule,
    /// Finest mesh width included, decimal or fraction.
    #[arg(long, value_parser = parse_ratio, default_value = "1/64")]
    hmin: f64,
    /// Coarsest mesh width included, decimal or fraction.
    #[arg(long, value_parser = parse_ratio, default_value = "1/2")]
    hmax: f64,
    /// End time.
    #[arg(long = "t-end", value_parser = parse_ratio, default_value = "4")]
    t_end: f64,
    /// Output directory.
    #[arg(long, value_name = "DIR", default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct OutArg {
    /// Output directory.
    #[arg(long, value_name = "DIR", default_value = "out")]
    out: PathBuf,
}

/// Parse "1/32" or "0.03125" into a float.
fn parse_ratio(s: &str) -> Result<f64, String> {
    let v = if let Some((num, den)) = s.split_once('/') {
        let n: f64 = num.trim().parse().map_err(|_| format!("bad numerator in '{s}'"))?;
        let d: f64 = den.trim().parse().map_err(|_| format!("bad denominator in '{s}'"))?;
        if d == 0.0 {
            return Err(format!("zero denominator in '{s}'"));
        }
        n / d
    } else {
        s.trim().parse().map_err(|_| format!("'{s}' is not a number"))?
    };
    if !v.is_finite() {
        return Err(format!("'{s}' is not finite"));
    }
    Ok(v)
}

fn parse_rule(s: &str) -> Result<RateRule, String> {
    s.parse::<RateRule>().map_err(|e| e.to_string())
}

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

fn exit_for(err: &Error) -> u8 {
    match err {
        Error::Config(_) | Error::Argument(_) | Error::Json(_) => EXIT_CONFIG,
        Error::Io(_) => 1,
        _ => EXIT_NUMERICAL,
    }
}

fn build_config(args: &RunArgs) -> Result<RunConfig, Error> {
    let mut cfg = match (&args.config, &args.preset) {
        (Some(path), None) => RunConfig::from_path(path)?,
        (None, Some(name)) => {
            if name != "sec6" {
                return Err(Error::Config(format!("unknown preset '{name}'")));
            }
            let h = args.h.ok_or_else(|| {
                Error::Config("--preset sec6 needs --h (e.g. --h 1/32)".into())
            })?;
            RunConfig::sec6(h, None, args.t_end.unwrap_or(4.0))?
        }
        (None, None) => {
            return Err(Error::Config("either --config PATH or --preset sec6 is required".into()))
        }
        (Some(_), Some(_)) => unreachable!("clap conflicts_with"),
    };
    if args.config.is_some() && args.h.is_some() {
        return Err(Error::Config(
            "--h applies to --preset runs; set \"cells\" in the config file instead".into(),
        ));
    }
    if let Some(tau) = args.tau {
        cfg.policy.tau = Some(tau);
    }
    if args.config.is_some() {
        if let Some(t_end) = args.t_end {
            cfg.end_time = t_end;
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Run one configuration, write outputs, and report the status.
fn run_and_emit(cfg: &RunConfig, out: &Path) -> Result<RunRecord, Error> {
    let record = dgft::timestepper::run(cfg)?;
    emit_outputs(&record, out)?;
    Ok(record)
}

fn describe(record: &RunRecord) {
    println!(
        "steps {}  transitions {}  flags {}  x_sc({}) = {:.15}  [{:.2}s]",
        record.steps_completed(),
        record.events.len(),
        record.flags.len(),
        record.final_state.time,
        record.final_shock(),
        record.wall_seconds
    );
    match &record.status {
        RunStatus::Completed => {}
        RunStatus::ShockReachedOutflow { step } => {
            println!("stopped early: shock reached the outflow region at step {step}");
        }
        RunStatus::Failed { step, message } => {
            println!("failed at step {step}: {message}");
        }
    }
}

fn cmd_run(args: &RunArgs, full_indicators: bool) -> Result<u8, Error> {
    let mut cfg = build_config(args)?;
    if full_indicators {
        cfg.store_spatial = true;
        cfg.spatial_stride = cfg.spatial_stride.max(1);
        if cfg.temporal_stride == 0 {
            cfg.temporal_stride = 1;
        }
    }
    let record = run_and_emit(&cfg, &args.out)?;
    describe(&record);
    println!("outputs in {}", args.out.display());
    Ok(if record.status.is_completed() { 0 } else { EXIT_NUMERICAL })
}

fn cmd_sweep(args: &SweepArgs) -> Result<u8, Error> {
    if args.hmin > args.hmax {
        return Err(Error::Config(format!(
            "--hmin {} exceeds --hmax {}",
            args.hmin, args.hmax
        )));
    }
    let hs: Vec<f64> = default_h_list()
        .into_iter()
        .filter(|&h| h >= args.hmin * (1.0 - 1e-9) && h <= args.hmax * (1.0 + 1e-9))
        .collect();
    if hs.is_empty() {
        return Err(Error::Config(format!(
            "no ladder widths inside [{}, {}]; the ladder is 1/2 .. 1/64",
            args.hmin, args.hmax
        )));
    }
    let table = convergence_study(args.rule, &hs, args.t_end)?;
    emit_convergence(&table, &args.out)?;

    println!("rule {}  T = {}", table.rule, table.end_time);
    println!("{:>10} {:>10} {:>20} {:>13} {:>9}", "h", "tau", "x_sc(T)", "diff", "ratio");
    let diffs = table.differences();
    let ratios = table.ratios();
    let mut ok = true;
    for (k, row) in table.rows.iter().enumerate() {
        let d = diffs[k].map_or(String::new(), |v| format!("{v:.5e}"));
        let r = ratios[k].map_or(String::new(), |v| format!("{v:.4}"));
        println!(
            "{:>10} {:>10} {:>20.15} {:>13} {:>9}",
            format!("1/{}", (1.0 / row.h).round()),
            format!("1/{}", (1.0 / row.tau).round()),
            row.x_shock,
            d,
            r
        );
        if row.status != "completed" {
            println!("  note: {}", row.status);
            ok = false;
        }
    }
    println!("outputs in {}", args.out.display());
    Ok(if ok { 0 } else { EXIT_NUMERICAL })
}

fn cmd_scenario(args: &OutArg) -> Result<u8, Error> {
    let report = run_anti_smoothing_scenario()?;
    emit_outputs(&report.stable, &args.out.join("stable"))?;
    emit_outputs(&report.unstable, &args.out.join("unstable"))?;
    emit_outputs(&report.recovery, &args.out.join("recovery"))?;

    let summary = serde_json::json!({
        "first_flag_step": report.first_flag_step,
        "amplification": report.amplification,
        "flags_after_switch": report.flags_after_switch,
        "recovered": report.recovered,
        "stable_completed": report.stable.status.is_completed(),
        "unstable_flags": report.unstable.flags.len(),
        "recovery_completed": report.recovery.status.is_completed(),
    });
    std::fs::create_dir_all(&args.out)?;
    std::fs::write(
        args.out.join("scenario.json"),
        format!("{}\n", serde_json::to_string_pretty(&summary)?),
    )?;

    println!(
        "first flag at step {:?}; |D0| amplification through step 24: {:.1}x",
        report.first_flag_step, report.amplification
    );
    println!(
        "recovery run: completed = {}, flags after the switch = {}",
        report.recovery.status.is_completed(),
        report.flags_after_switch
    );
    println!("outputs in {}", args.out.display());
    Ok(if report.recovered && report.first_flag_step.is_some() {
        0
    } else {
        EXIT_NUMERICAL
    })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match &cli.cmd {
        Cmd::Run(args) => cmd_run(args, false),
        Cmd::Indicators(args) => cmd_run(args, true),
        Cmd::Sweep(args) => cmd_sweep(args),
        Cmd::Scenario(args) => cmd_scenario(args),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_for(&e))
        }
    }
}
