//! The complete record of one run: per-step shock samples, transition
//! events, indicator summaries, snapshots, detector flags, and the
//! final state. Everything downstream (CSV emission, acceptance checks,
//! the scenario report) reads from this.

use crate::config::RunConfig;
use crate::semidiscrete::ShockState;
use crate::shockmesh::TransitionEvent;
use crate::smoothness::{SpatialIndicator, TemporalIndicator};
use serde::Serialize;

/// How a run ended.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RunStatus {
    /// Reached the configured end time.
    Completed,
    /// The shock ran out of room on the right; the run stops cleanly
    /// with everything up to that step recorded.
    ShockReachedOutflow { step: usize },
    /// Blowup or a fatal step; the message carries the cause.
    Failed { step: usize, message: String },
}

impl RunStatus {
    pub fn is_completed(&self) -> bool {
        matches!(self, RunStatus::Completed)
    }
}

/// One accepted time level of the shock path.
#[derive(Debug, Clone, Serialize)]
pub struct ShockSample {
    pub step: usize,
    pub time: f64,
    pub x_shock: f64,
    pub speed: f64,
    pub height: f64,
    pub lax_ok: bool,
}

/// Per-order maxima of a spatial indicator, kept even when the full
/// indicator is not stored.
#[derive(Debug, Clone, Serialize)]
pub struct SpatialSummary {
    pub step: usize,
    pub time: f64,
    pub max_abs_m: Vec<f64>,
    pub max_abs_d: Vec<f64>,
}

/// Solution values sampled on every cell at one time level.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub step: usize,
    pub time: f64,
    /// (x, u) pairs; cell endpoints appear twice (one-sided limits).
    pub points: Vec<(f64, f64)>,
}

/// One detector hit, tied to the step that completed the pattern.
#[derive(Debug, Clone, Serialize)]
pub struct FlagEvent {
    pub step: usize,
    pub time: f64,
    pub boundary: usize,
    pub order: usize,
    pub values: Vec<f64>,
}

/// One stretch of constant step size.
#[derive(Debug, Clone, Serialize)]
pub struct Segment {
    pub tau: f64,
    pub steps: usize,
    pub cfl_ok: bool,
    pub strengthened_ok: bool,
}

#[derive(Debug, Clone)]
pub struct RunRecord {
    pub config: RunConfig,
    pub beta: f64,
    pub segments: Vec<Segment>,
    pub status: RunStatus,
    pub samples: Vec<ShockSample>,
    pub events: Vec<TransitionEvent>,
    pub spatial: Vec<SpatialSummary>,
    /// Full indicators, only when config.store_spatial is set.
    pub spatial_full: Vec<SpatialIndicator>,
    pub temporal: Vec<TemporalIndicator>,
    pub snapshots: Vec<Snapshot>,
    pub flags: Vec<FlagEvent>,
    pub final_state: ShockState,
    pub wall_seconds: f64,
}

impl RunRecord {
    /// Final shock position (the last accepted sample).
    pub fn final_shock(&self) -> f64 {
        self.samples.last().map_or(f64::NAN, |s| s.x_shock)
    }

    pub fn steps_completed(&self) -> usize {
        self.samples.last().map_or(0, |s| s.step)
    }

    pub fn first_flag_step(&self) -> Option<usize> {
        self.flags.first().map(|f| f.step)
    }

    /// Largest |D^0| over recorded indicators up to and including `step`.
    pub fn max_abs_d0_through(&self, step: usize) -> f64 {
        self.spatial
            .iter()
            .filter(|s| s.step <= step)
            .filter_map(|s| s.max_abs_d.first().copied())
            .fold(0.0, f64::max)
    }

    pub fn max_abs_d0(&self) -> f64 {
        self.max_abs_d0_through(usize::MAX)
    }
}
