//! Time integration: the three-stage TVD Runge-Kutta scheme, the
//! CFL-constrained step-size policy, transition triggering, and the
//! full run loop.
//!
//! The coupled ODE system is W_t = Psi(W) for the flat vector
//! W = (x_sc, all modal coefficients). Each stage is a convex
//! combination of previous stages plus a forward-Euler substep:
//!
//!   W1      = W + tau Psi(W)
//!   W2      = 3/4 W + 1/4 W1 + 1/4 tau Psi(W1)
//!   W_(n+1) = 1/3 W + 2/3 W2 + 2/3 tau Psi(W2)
//!
//! Stages combine states whose shock positions differ, so their
//! special-cell polynomials live on different intervals. The linear
//! combinations act componentwise in a basis frozen for the step: each
//! special-cell polynomial is expressed on the step-start intervals
//! (an exact change of basis), and the matching rate of a stage state
//! is the pointwise time derivative of its cell polynomials, which
//! stays in the same polynomial space. Transitions are checked once
//! per completed step and rebuild the cells at the overshot shock
//! position. The automatic step size is min(h/beta, gamma h^(1+alpha))
//! rounded down to the reciprocal of an integer; an explicit override
//! is accepted after validating both CFL conditions (violations warn
//! but do not abort, so deliberately unstable experiments can run).

use crate::config::{PolicySpec, RunConfig};
use crate::error::{Error, Result};
use crate::polykernel::{reexpand, ModalPoly};
use crate::record::{
    FlagEvent, RunRecord, RunStatus, Segment, ShockSample, Snapshot, SpatialSummary,
};
use crate::semidiscrete::{Discretization, ShockState};
use crate::shockmesh::{apply_transition, TransitionEvent};
use crate::smoothness::{
    detect_anti_smoothing, shock_height, spatial_indicator, temporal_indicator, SpatialIndicator,
};

/// Stage weights (previous-state weight, stage-state weight, Euler factor).
pub const STAGE2_WEIGHTS: (f64, f64, f64) = (0.75, 0.25, 0.25);
pub const STAGE3_WEIGHTS: (f64, f64, f64) = (1.0 / 3.0, 2.0 / 3.0, 2.0 / 3.0);

/// A validated step-size choice.
#[derive(Debug, Clone, Copy)]
pub struct TimestepPlan {
    pub tau: f64,
    pub steps: usize,
    pub cfl_ok: bool,
    pub strengthened_ok: bool,
}

/// Pick the step size for a span of length `t_end`.
///
/// With an explicit override the value is used as-is after checking
/// that it divides `t_end` and testing both CFL conditions (failures
/// are warnings, recorded in the returned flags). Otherwise the raw
/// bound min(h/beta, gamma h^(1+alpha)) is rounded down to 1/integer,
/// then shrunk to an exact divisor of `t_end` if needed.
pub fn choose_timestep(
    h: f64,
    beta: f64,
    t_end: f64,
    alpha_default: f64,
    policy: &PolicySpec,
) -> Result<TimestepPlan> {
    if !(h > 0.0 && beta > 0.0) {
        return Err(Error::Config(format!(
            "step policy needs h > 0 and beta > 0, got h = {h}, beta = {beta}"
        )));
    }
    if !(t_end >= 0.0) {
        return Err(Error::Config(format!("negative span {t_end}")));
    }
    if !(policy.gamma > 0.0) {
        return Err(Error::Config(format!("gamma {} must be positive", policy.gamma)));
    }
    let alpha = policy.alpha.unwrap_or(alpha_default);
    if !(alpha > 0.0) {
        return Err(Error::Config(format!("alpha {alpha} must be positive")));
    }
    let cap = policy.gamma * h.powf(1.0 + alpha);

    if let Some(tau) = policy.tau {
        if !(tau > 0.0) {
            return Err(Error::Config(format!("step size {tau} must be positive")));
        }
        let n = (t_end / tau).round();
        if (n * tau - t_end).abs() > 1e-9 * t_end.max(tau) {
            return Err(Error::Config(format!(
                "span {t_end} is not an integer multiple of the step size {tau}"
            )));
        }
        let cfl_ok = beta * tau <= h * (1.0 + 1e-12);
        let strengthened_ok = tau <= cap * (1.0 + 1e-12);
        if !cfl_ok {
            log::warn!(
                "step size {tau} violates the CFL condition: beta tau = {} > h = {h}",
                beta * tau
            );
        }
        if !strengthened_ok {
            log::warn!(
                "step size {tau} violates the strengthened CFL condition tau <= gamma h^(1+alpha) = {cap:.6e}"
            );
        }
        return Ok(TimestepPlan {
            tau,
            steps: n as usize,
            cfl_ok,
            strengthened_ok,
        });
    }

    let raw = (h / beta).min(cap);
    if !(raw > 0.0 && raw.is_finite()) {
        return Err(Error::Config(format!("step-size bound {raw} is not positive")));
    }
    // Round down to the reciprocal of an integer (the 1e-12 slack stops
    // an exact reciprocal from being pushed to the next integer).
    let n_inv = (1.0 / raw * (1.0 - 1e-12)).ceil().max(1.0);
    let mut tau = 1.0 / n_inv;
    let steps = if t_end == 0.0 {
        0
    } else {
        let exact = t_end / tau;
        let k = if (exact - exact.round()).abs() < 1e-9 * exact.max(1.0) {
            exact.round()
        } else {
            // The 1/integer step does not divide t_end; shrink to the
            // nearest exact divisor instead.
            exact.ceil()
        };
        tau = t_end / k;
        k as usize
    };
    Ok(TimestepPlan {
        tau,
        steps,
        cfl_ok: true,
        strengthened_ok: true,
    })
}

/// Stage vector in the step's frozen basis: the shock position plus the
/// modal coefficients of every cell, with the special pair expressed on
/// the intervals the step started from.
///
/// Stage states carry different shock positions, so their special-cell
/// polynomials live on different intervals and their raw coefficients
/// are not commensurable. Re-expanding each special-cell polynomial
/// onto the step-start intervals (exact: same polynomial, different
/// basis) turns every stage combination into plain vector arithmetic
/// in one shared basis. The matching rate of change is the pointwise
/// time derivative of the cell polynomials (coefficient rates plus the
/// basis-motion term), re-expressed on the same frozen intervals.
struct StageVec {
    x: f64,
    cells: Vec<ModalPoly>,
}

/// Frozen intervals of the special pair: (slot, interval) for each side.
type FrozenPair = [(usize, (f64, f64)); 2];

/// The rate of a stage state in frozen-basis coordinates: the shock
/// speed and per cell the time derivative of the cell polynomial.
fn frozen_rate(
    disc: &Discretization,
    w: &ShockState,
    t: f64,
    frozen: &FrozenPair,
) -> Result<(f64, Vec<ModalPoly>)> {
    let d = disc.rhs(w, t)?;
    let mut ut = disc.eulerian_ut(w, &d)?;
    for &(slot, (lo, hi)) in frozen {
        ut[slot] = reexpand(&ut[slot], lo, hi)?;
    }
    Ok((d.shock_speed, ut))
}

impl StageVec {
    /// The step-start state in its own (frozen) basis: the identity.
    fn from_state(state: &ShockState) -> Self {
        StageVec {
            x: state.mesh.x_shock(),
            cells: state.cells.clone(),
        }
    }

    /// Componentwise combination sum_j a_j V_j + c * rate.
    fn combine(parts: &[(f64, &StageVec)], euler: (f64, &(f64, Vec<ModalPoly>))) -> Result<Self> {
        let base = parts[0].1;
        let (c, rate) = euler;
        let mut x = c * rate.0;
        for (a, v) in parts {
            x += a * v.x;
        }
        let mut cells = Vec::with_capacity(base.cells.len());
        for slot in 0..base.cells.len() {
            let (lo, hi) = base.cells[slot].interval();
            let mut coeffs = vec![0.0; base.cells[slot].coeffs().len()];
            for (a, v) in parts {
                for (k, out) in coeffs.iter_mut().enumerate() {
                    *out += a * v.cells[slot].coeffs()[k];
                }
            }
            for (k, out) in coeffs.iter_mut().enumerate() {
                *out += c * rate.1[slot].coeffs()[k];
            }
            cells.push(ModalPoly::new(lo, hi, coeffs)?);
        }
        Ok(StageVec { x, cells })
    }

    /// Back to a state: band-check the shock position, rebuild the cell
    /// geometry there, and re-expand the special pair onto its live
    /// intervals (again exact).
    fn decode(&self, base: &ShockState, time: f64, step: usize, stage_no: usize) -> Result<ShockState> {
        let mesh = &base.mesh;
        let i = mesh.shock_index();
        let upper = mesh.boundary(i + 1) + 0.5 * mesh.h();
        let lower = mesh.boundary(i) - 0.5 * mesh.h();
        if !(self.x < upper && self.x > lower) {
            return Err(Error::FatalStep {
                step,
                detail: format!(
                    "stage {stage_no} shock candidate {:.6} left the tracking band ({lower:.6}, {upper:.6})",
                    self.x
                ),
            });
        }
        let mesh = mesh.with_shock_at(self.x)?;
        let mut cells = Vec::with_capacity(self.cells.len());
        for (slot, cell) in self.cells.iter().enumerate() {
            if slot == mesh.left_slot() || slot == mesh.right_slot() {
                let (lo, hi) = mesh.interval(slot);
                cells.push(reexpand(cell, lo, hi)?);
            } else {
                cells.push(cell.clone());
            }
        }
        Ok(ShockState { mesh, cells, time })
    }
}

/// One TVD Runge-Kutta step of size tau; returns the candidate state.
pub fn tvdrk3_step(
    disc: &Discretization,
    state: &ShockState,
    tau: f64,
    step: usize,
) -> Result<ShockState> {
    let t = state.time;
    let mesh = &state.mesh;
    let frozen: FrozenPair = [
        (mesh.left_slot(), mesh.interval(mesh.left_slot())),
        (mesh.right_slot(), mesh.interval(mesh.right_slot())),
    ];
    let v0 = StageVec::from_state(state);
    let r0 = frozen_rate(disc, state, t, &frozen)?;
    let v1 = StageVec::combine(&[(1.0, &v0)], (tau, &r0))?;
    let s1 = v1.decode(state, t + tau, step, 1)?;
    let r1 = frozen_rate(disc, &s1, t + tau, &frozen)?;
    let (a, b, c) = STAGE2_WEIGHTS;
    let v2 = StageVec::combine(&[(a, &v0), (b, &v1)], (c * tau, &r1))?;
    let s2 = v2.decode(state, t + 0.5 * tau, step, 2)?;
    let r2 = frozen_rate(disc, &s2, t + 0.5 * tau, &frozen)?;
    let (a, b, c) = STAGE3_WEIGHTS;
    let v3 = StageVec::combine(&[(a, &v0), (b, &v2)], (c * tau, &r2))?;
    v3.decode(state, t + tau, step, 3)
}

/// One accepted step: a full TVD-RK step, then the cell rebuild if the
/// shock has crossed the right boundary of its cell. The rebuild acts at
/// the overshot position as-is; under the CFL condition the shock moves
/// less than h per step, so at most one crossing can occur.
pub fn advance(
    disc: &Discretization,
    state: &ShockState,
    tau: f64,
    step: usize,
) -> Result<(ShockState, Option<TransitionEvent>)> {
    let cand = tvdrk3_step(disc, state, tau, step)?;
    if !(cand.mesh.x_shock() > state.mesh.x_shock()) {
        return Err(Error::FatalStep {
            step,
            detail: format!(
                "shock position did not increase: {} -> {}",
                state.mesh.x_shock(),
                cand.mesh.x_shock()
            ),
        });
    }
    if cand.mesh.needs_transition() {
        let (post, event) = apply_transition(&cand, step)?;
        return Ok((post, Some(event)));
    }
    Ok((cand, None))
}

/// Scalar TVD Runge-Kutta step for u' = f(u, t), same tableau.
pub fn tvdrk3_scalar(u: f64, t: f64, tau: f64, f: impl Fn(f64, f64) -> f64) -> f64 {
    let u1 = u + tau * f(u, t);
    let (a, b, c) = STAGE2_WEIGHTS;
    let u2 = a * u + b * u1 + c * tau * f(u1, t + tau);
    let (a, b, c) = STAGE3_WEIGHTS;
    a * u + b * u2 + c * tau * f(u2, t + 0.5 * tau)
}

/// Step-size segments of a run (two when a mid-run switch is configured).
pub fn plan_segments(config: &RunConfig, beta: f64) -> Result<Vec<Segment>> {
    let h = config.h();
    let alpha_default = 1.0 / config.degree as f64;
    let to_segment = |p: TimestepPlan| Segment {
        tau: p.tau,
        steps: p.steps,
        cfl_ok: p.cfl_ok,
        strengthened_ok: p.strengthened_ok,
    };
    match &config.tau_switch {
        None => {
            let plan = choose_timestep(h, beta, config.end_time, alpha_default, &config.policy)?;
            Ok(if plan.steps == 0 {
                Vec::new()
            } else {
                vec![to_segment(plan)]
            })
        }
        Some(sw) => {
            let tau1 = config.policy.tau.ok_or_else(|| {
                Error::Config("a tau_switch needs an explicit policy.tau".into())
            })?;
            let t1 = sw.at_step as f64 * tau1;
            if t1 > config.end_time + 1e-12 {
                return Err(Error::Config(format!(
                    "switch at step {} (t = {t1}) is past the end time {}",
                    sw.at_step, config.end_time
                )));
            }
            let plan1 = choose_timestep(h, beta, t1, alpha_default, &config.policy)?;
            let policy2 = PolicySpec {
                tau: Some(sw.tau),
                ..config.policy.clone()
            };
            let plan2 =
                choose_timestep(h, beta, config.end_time - t1, alpha_default, &policy2)?;
            Ok(vec![to_segment(plan1), to_segment(plan2)])
        }
    }
}

fn sample_state(disc: &Discretization, state: &ShockState, step: usize) -> Result<ShockSample> {
    let speed = disc.rh_speed(state)?;
    let (height, _) = shock_height(state);
    Ok(ShockSample {
        step,
        time: state.time,
        x_shock: state.mesh.x_shock(),
        speed,
        height,
        lax_ok: disc.lax_condition(state)?,
    })
}

fn take_snapshot(state: &ShockState, step: usize, samples_per_cell: usize) -> Snapshot {
    let mut points = Vec::with_capacity(state.cells.len() * samples_per_cell);
    for cell in &state.cells {
        let (lo, hi) = cell.interval();
        for k in 0..samples_per_cell {
            let x = lo + (hi - lo) * k as f64 / (samples_per_cell - 1) as f64;
            points.push((x, cell.eval_unchecked(x, 0)));
        }
    }
    Snapshot {
        step,
        time: state.time,
        points,
    }
}

/// Integrate a configuration from t = 0 to its end time.
///
/// Configuration problems are returned as errors; runtime failures
/// (blowup, fatal steps, a degenerate shock) end the run early with
/// status `Failed` and everything recorded up to that point, and the
/// shock reaching the outflow region ends it with status
/// `ShockReachedOutflow`. The error carries the failing step either way.
pub fn run(config: &RunConfig) -> Result<RunRecord> {
    config.validate()?;
    let start = std::time::Instant::now();
    let beta = config.beta()?;
    let disc = config.build_discretization()?;
    let mut state = config.build_initial_state()?;
    let segments = plan_segments(config, beta)?;
    let total_steps: usize = segments.iter().map(|s| s.steps).sum();

    let mut samples = Vec::with_capacity(total_steps + 1);
    let mut events = Vec::new();
    let mut spatial = Vec::new();
    let mut spatial_full = Vec::new();
    let mut temporal = Vec::new();
    let mut snapshots = Vec::new();
    let mut flags: Vec<FlagEvent> = Vec::new();
    let mut history: Vec<SpatialIndicator> = Vec::new();
    let mut pending: Vec<f64> = config.snapshot_times.clone();
    pending.sort_by(|x, y| x.partial_cmp(y).unwrap());

    let mut status = RunStatus::Completed;
    let mut step = 0usize;

    // Records shared between the initial state and every accepted step.
    let observe = |state: &ShockState,
                       step: usize,
                       tau_now: f64,
                       samples: &mut Vec<ShockSample>,
                       spatial: &mut Vec<SpatialSummary>,
                       spatial_full: &mut Vec<SpatialIndicator>,
                       temporal: &mut Vec<crate::smoothness::TemporalIndicator>,
                       snapshots: &mut Vec<Snapshot>,
                       flags: &mut Vec<FlagEvent>,
                       history: &mut Vec<SpatialIndicator>,
                       pending: &mut Vec<f64>|
     -> Result<()> {
        samples.push(sample_state(&disc, state, step)?);
        if config.spatial_stride > 0 && step % config.spatial_stride == 0 {
            let ind = spatial_indicator(&disc, state, step)?;
            spatial.push(SpatialSummary {
                step,
                time: state.time,
                max_abs_m: ind.max_abs_m(),
                max_abs_d: ind.max_abs_d(),
            });
            history.push(ind.clone());
            let keep = config.detector.window.max(config.detector.persistence + 1);
            if history.len() > keep {
                history.drain(..history.len() - keep);
            }
            let report = detect_anti_smoothing(history, &config.detector);
            for hit in report.hits {
                flags.push(FlagEvent {
                    step,
                    time: state.time,
                    boundary: hit.boundary,
                    order: hit.order,
                    values: hit.values,
                });
            }
            if config.store_spatial {
                spatial_full.push(ind);
            }
        }
        if config.temporal_stride > 0 && step % config.temporal_stride == 0 {
            temporal.push(temporal_indicator(&disc, state, step, config.temporal_orders)?);
        }
        while let Some(&t_req) = pending.first() {
            if (state.time - t_req).abs() <= 0.5 * tau_now {
                snapshots.push(take_snapshot(state, step, config.samples_per_cell));
                pending.remove(0);
            } else {
                break;
            }
        }
        Ok(())
    };

    let tau0 = segments.first().map_or(1e-12, |s| s.tau);
    observe(
        &state,
        0,
        tau0,
        &mut samples,
        &mut spatial,
        &mut spatial_full,
        &mut temporal,
        &mut snapshots,
        &mut flags,
        &mut history,
        &mut pending,
    )?;

    'time_loop: for seg in &segments {
        for _ in 0..seg.steps {
            step += 1;
            let outcome = advance(&disc, &state, seg.tau, step).and_then(|(next, stepped)| {
                state = next;
                events.extend(stepped);
                observe(
                    &state,
                    step,
                    seg.tau,
                    &mut samples,
                    &mut spatial,
                    &mut spatial_full,
                    &mut temporal,
                    &mut snapshots,
                    &mut flags,
                    &mut history,
                    &mut pending,
                )
            });
            match outcome {
                Ok(()) => {}
                Err(Error::ShockReachedOutflow { step: s }) => {
                    status = RunStatus::ShockReachedOutflow { step: s };
                    break 'time_loop;
                }
                Err(e) => {
                    log::warn!("run failed at step {step}: {e}");
                    status = RunStatus::Failed {
                        step,
                        message: e.to_string(),
                    };
                    break 'time_loop;
                }
            }
        }
    }

    Ok(RunRecord {
        config: config.clone(),
        beta,
        segments,
        status,
        samples,
        events,
        spatial,
        spatial_full,
        temporal,
        snapshots,
        flags,
        final_state: state,
        wall_seconds: start.elapsed().as_secs_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{InitialSpec, RunConfig};
    use crate::flux::FluxModel;
    use crate::polykernel::ModalPoly;
    use crate::semidiscrete::Inflow;
    use crate::shockmesh::ShockMesh;

    #[test]
    fn stage_weights_are_convex() {
        for (a, b, _) in [STAGE2_WEIGHTS, STAGE3_WEIGHTS] {
            assert!(a >= 0.0 && b >= 0.0);
            assert!((a + b - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn scalar_step_matches_the_cubic_taylor_truncation() {
        // u' = -u, one step of 0.1 reproduces 1 - t + t^2/2 - t^3/6.
        let got = tvdrk3_scalar(1.0, 0.0, 0.1, |u, _| -u);
        let taylor = 1.0 - 0.1 + 0.005 - 0.001 / 6.0;
        assert!((got - taylor).abs() < 1e-15);
        // Zero right-hand side leaves the value untouched.
        assert_eq!(tvdrk3_scalar(0.7, 0.0, 0.1, |_, _| 0.0), 0.7);
    }

    #[test]
    fn automatic_step_size_is_a_reciprocal_divisor() {
        let policy = PolicySpec::default();
        let plan = choose_timestep(1.0 / 32.0, 1.6, 4.0, 1.0 / 3.0, &policy).unwrap();
        // Strengthened bound 0.1 (1/32)^(4/3) ~ 9.843e-4 -> 1/1016.
        assert!((plan.tau - 1.0 / 1016.0).abs() < 1e-15);
        assert_eq!(plan.steps, 4064);
        assert!((plan.steps as f64 * plan.tau - 4.0).abs() < 1e-12);
        assert!(plan.cfl_ok && plan.strengthened_ok);
        let n = 1.0 / plan.tau;
        assert!((n - n.round()).abs() < 1e-9);
    }

    #[test]
    fn overrides_are_validated_not_rejected() {
        let with_tau = |tau| PolicySpec {
            tau: Some(tau),
            ..PolicySpec::default()
        };
        let plan = choose_timestep(1.0 / 32.0, 1.6, 4.0, 1.0 / 3.0, &with_tau(1.0 / 1024.0)).unwrap();
        assert!(plan.cfl_ok && plan.strengthened_ok);
        assert_eq!(plan.steps, 4096);

        // tau = h/10: standard CFL fine, strengthened violated (warn only).
        let plan = choose_timestep(1.0 / 32.0, 1.6, 4.0, 1.0 / 3.0, &with_tau(1.0 / 320.0)).unwrap();
        assert!(plan.cfl_ok && !plan.strengthened_ok);

        let plan = choose_timestep(0.5, 1.6, 4.0, 1.0 / 3.0, &with_tau(1.0 / 25.0)).unwrap();
        assert!(plan.cfl_ok);

        // A step that does not divide the span is a configuration error.
        assert!(choose_timestep(0.5, 1.6, 4.0, 1.0 / 3.0, &with_tau(0.3)).is_err());
    }

    fn translation_setup(x0: f64) -> (Discretization, ShockState) {
        let disc = Discretization::new(
            FluxModel::burgers(0.05, 2.2).unwrap(),
            Inflow::Constant(1.2),
            3,
            6,
            1e-6,
            false,
        )
        .unwrap();
        let mesh = ShockMesh::new(0.0, 10.0, 20, x0).unwrap();
        let cells = (0..mesh.cell_count())
            .map(|slot| {
                let (lo, hi) = mesh.interval(slot);
                let v = if slot <= mesh.left_slot() { 1.2 } else { 0.8 };
                ModalPoly::new(lo, hi, vec![v, 0.0, 0.0, 0.0]).unwrap()
            })
            .collect();
        (
            disc,
            ShockState {
                mesh,
                cells,
                time: 0.0,
            },
        )
    }

    #[test]
    fn piecewise_constant_jump_translates_exactly() {
        // Speed (f(1.2) - f(0.8))/0.4 = 1; all coefficient rates vanish,
        // so the RK combination is exact for the linear motion.
        let (disc, state) = translation_setup(3.18);
        let tau = 0.01;
        let next = tvdrk3_step(&disc, &state, tau, 1).unwrap();
        assert!((next.mesh.x_shock() - 3.19).abs() < 1e-14);
        assert!((next.time - tau).abs() < 1e-15);
        for (a, b) in state.cells.iter().zip(&next.cells) {
            for (x, y) in a.coeffs().iter().zip(b.coeffs()) {
                assert!((x - y).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn crossing_the_cell_boundary_triggers_a_transition() {
        let (disc, state) = translation_setup(3.49);
        let (next, event) = advance(&disc, &state, 0.05, 1).unwrap();
        let event = event.expect("the shock crossed 3.5");
        assert_eq!(event.old_index, 6);
        assert_eq!(event.new_index, 7);
        // The rebuild happens after the full step, at the overshot spot.
        assert!((event.time - 0.05).abs() < 1e-15);
        assert!((next.mesh.x_shock() - 3.54).abs() < 1e-10);
        assert!((next.time - 0.05).abs() < 1e-15);
        assert!(next.mesh.widths_valid());
        // Piecewise constants merge losslessly.
        assert!(event.measured_l1 < 1e-13);

        let (_, none) = advance(&disc, &state, 0.005, 1).unwrap();
        assert!(none.is_none());
    }

    #[test]
    fn runaway_stage_is_a_fatal_step() {
        let (disc, state) = translation_setup(3.49);
        match tvdrk3_step(&disc, &state, 0.8, 7) {
            Err(Error::FatalStep { step: 7, detail }) => {
                assert!(detail.contains("stage 1"), "{detail}");
            }
            other => panic!("expected a fatal step, got {other:?}"),
        }
    }

    fn constant_config() -> RunConfig {
        RunConfig {
            initial: InitialSpec::PiecewisePolynomial {
                left: vec![1.2],
                right: vec![0.8],
            },
            end_time: 0.2,
            policy: PolicySpec {
                tau: Some(0.05),
                ..PolicySpec::default()
            },
            snapshot_times: vec![0.0, 0.1, 0.2],
            temporal_stride: 1,
            temporal_orders: 2,
            ..RunConfig::default()
        }
    }

    #[test]
    fn run_records_a_complete_history() {
        let record = run(&constant_config()).unwrap();
        assert!(record.status.is_completed());
        assert_eq!(record.samples.len(), 5); // steps 0..=4
        assert!((record.final_shock() - 3.38).abs() < 1e-12);
        assert_eq!(record.snapshots.len(), 3);
        assert!(record.samples.iter().all(|s| s.lax_ok));
        assert!(record.flags.is_empty());
        assert!(record.events.is_empty());
        // Speed is exactly 1 for the 1.2/0.8 constant pair.
        assert!(record.samples.iter().all(|s| (s.speed - 1.0).abs() < 1e-12));
        assert_eq!(record.temporal.len(), 5);
        // Steady profile in the moving frame: second shock derivative ~ 0.
        assert!(record.temporal[2].shock[2].abs() < 1e-9);
    }

    #[test]
    fn zero_end_time_records_only_the_initial_state() {
        let mut cfg = constant_config();
        cfg.end_time = 0.0;
        cfg.snapshot_times = vec![0.0];
        let record = run(&cfg).unwrap();
        assert!(record.status.is_completed());
        assert_eq!(record.samples.len(), 1);
        assert_eq!(record.snapshots.len(), 1);
        assert!(record.segments.is_empty());
        assert!((record.final_shock() - 3.18).abs() < 1e-15);
    }

    #[test]
    fn tau_switch_produces_two_segments() {
        let mut cfg = constant_config();
        cfg.end_time = 0.3;
        cfg.policy.tau = Some(0.05);
        cfg.tau_switch = Some(crate::config::TauSwitch {
            at_step: 2,
            tau: 0.025,
        });
        let record = run(&cfg).unwrap();
        assert!(record.status.is_completed());
        assert_eq!(record.segments.len(), 2);
        assert_eq!(record.segments[0].steps, 2);
        assert_eq!(record.segments[1].steps, 8);
        assert_eq!(record.steps_completed(), 10);
        assert!((record.final_state.time - 0.3).abs() < 1e-12);
        assert!((record.final_shock() - 3.48).abs() < 1e-12);
    }
}
