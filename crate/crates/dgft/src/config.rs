//! Run configuration: JSON schema, validation, and construction of the
//! discretization and the projected initial state.
//!
//! A configuration describes one initial-boundary-value problem with a
//! single tracked shock: the domain, the background cell count, the
//! flux, piecewise-smooth initial data left and right of the initial
//! shock position, a constant inflow value, and the time-stepping
//! policy. The admissible interval of the flux is derived from the
//! initial data: the data range of u_I and u_a, padded on both sides by
//! `admissible_margin` times the range width, so that a solution
//! leaving this interval is reported as blowup rather than silently
//! extrapolated.

use crate::error::{Error, Result};
use crate::flux::FluxModel;
use crate::polykernel::{gauss_rule, project_function};
use crate::semidiscrete::{Discretization, Inflow, ShockState};
use crate::shockmesh::ShockMesh;
use crate::smoothness::DetectorConfig;
use serde::{Deserialize, Serialize};

/// Flux choices: Burgers f(u) = u^2/2 or a polynomial in u given by
/// ascending monomial coefficients.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FluxSpec {
    Burgers,
    Polynomial(Vec<f64>),
}

/// Initial data left and right of the shock.
///
/// `Preset("sec6")` is the bundled benchmark: a sin^4 bump flowing into
/// a slow sine wave. `PiecewisePolynomial` gives ascending monomial
/// coefficients in x for the two sides.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialSpec {
    Preset(String),
    PiecewisePolynomial { left: Vec<f64>, right: Vec<f64> },
}

/// Time-step policy: either the automatic choice
/// tau = min(h/beta, gamma h^(1+alpha)) rounded down to a divisor, or an
/// explicit override (validated against both CFL conditions, warning
/// only).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PolicySpec {
    pub gamma: f64,
    /// Defaults to 1/p when absent.
    pub alpha: Option<f64>,
    pub tau: Option<f64>,
}

impl Default for PolicySpec {
    fn default() -> Self {
        Self {
            gamma: 0.1,
            alpha: None,
            tau: None,
        }
    }
}

/// Mid-run step-size change: from the start of step `at_step` (1-based)
/// the run continues with step size `tau`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TauSwitch {
    pub at_step: usize,
    pub tau: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub domain: [f64; 2],
    /// Background cell count m; the working mesh has m - 1 cells.
    pub cells: usize,
    pub degree: usize,
    pub flux: FluxSpec,
    pub initial: InitialSpec,
    pub shock_position: f64,
    /// Constant inflow value u_a.
    pub inflow: f64,
    pub end_time: f64,
    pub policy: PolicySpec,
    pub tau_switch: Option<TauSwitch>,
    /// Spatial indicator cadence in steps; 0 disables.
    pub spatial_stride: usize,
    /// Temporal indicator cadence in steps; 0 disables.
    pub temporal_stride: usize,
    /// Highest time-derivative order reported (<= 4).
    pub temporal_orders: usize,
    pub snapshot_times: Vec<f64>,
    pub samples_per_cell: usize,
    /// Gauss nodes per cell; defaults to degree + 3.
    pub quadrature_nodes: Option<usize>,
    pub neglect_shock_correction: bool,
    /// Padding of the admissible interval, as a fraction of the
    /// initial-data range width.
    pub admissible_margin: f64,
    pub height_floor: f64,
    pub detector: DetectorConfig,
    /// Keep every full spatial indicator in memory (needed to emit
    /// indicators.csv); summaries are always kept.
    pub store_spatial: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            domain: [0.0, 10.0],
            cells: 20,
            degree: 3,
            flux: FluxSpec::Burgers,
            initial: InitialSpec::Preset("sec6".into()),
            shock_position: 3.18,
            inflow: 1.2,
            end_time: 4.0,
            policy: PolicySpec::default(),
            tau_switch: None,
            spatial_stride: 1,
            temporal_stride: 0,
            temporal_orders: 4,
            snapshot_times: Vec::new(),
            samples_per_cell: 8,
            quadrature_nodes: None,
            neglect_shock_correction: false,
            admissible_margin: 0.1,
            height_floor: 1e-6,
            detector: DetectorConfig::default(),
            store_spatial: false,
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text)
            .map_err(|e| Error::Config(format!("config parse error: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let [a, b] = self.domain;
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::Config(format!("domain [{a}, {b}] is not an interval")));
        }
        if self.cells < 6 {
            return Err(Error::Config(format!(
                "cell count {} too small, need at least 6",
                self.cells
            )));
        }
        if self.degree < 2 || self.degree > 8 {
            return Err(Error::Config(format!(
                "polynomial degree {} outside 2..=8",
                self.degree
            )));
        }
        if !(self.shock_position > a && self.shock_position < b) {
            return Err(Error::Config(format!(
                "shock position {} outside the domain interior",
                self.shock_position
            )));
        }
        if !(self.end_time >= 0.0 && self.end_time.is_finite()) {
            return Err(Error::Config(format!("end time {} invalid", self.end_time)));
        }
        if !(self.policy.gamma > 0.0) {
            return Err(Error::Config(format!(
                "CFL constant gamma {} must be positive",
                self.policy.gamma
            )));
        }
        if let Some(alpha) = self.policy.alpha {
            if !(alpha > 0.0) {
                return Err(Error::Config(format!("CFL exponent alpha {alpha} must be positive")));
            }
        }
        if let Some(tau) = self.policy.tau {
            if !(tau > 0.0) {
                return Err(Error::Config(format!("step size {tau} must be positive")));
            }
        }
        if let Some(sw) = &self.tau_switch {
            if !(sw.tau > 0.0) {
                return Err(Error::Config(format!(
                    "switch step size {} must be positive",
                    sw.tau
                )));
            }
            if self.policy.tau.is_none() {
                return Err(Error::Config(
                    "a tau_switch needs an explicit policy.tau for the first phase".into(),
                ));
            }
        }
        if self.temporal_orders > 4 {
            return Err(Error::Config(format!(
                "temporal orders {} exceed the supported 4",
                self.temporal_orders
            )));
        }
        if self.samples_per_cell < 2 {
            return Err(Error::Config(
                "snapshots need at least 2 samples per cell (both endpoints)".into(),
            ));
        }
        if let Some(q) = self.quadrature_nodes {
            if q < self.degree + 1 {
                return Err(Error::Config(format!(
                    "{q} quadrature nodes cannot integrate degree {} exactly",
                    self.degree
                )));
            }
        }
        if !(self.admissible_margin >= 0.0) {
            return Err(Error::Config("admissible margin must be >= 0".into()));
        }
        if !(self.height_floor > 0.0) {
            return Err(Error::Config("height floor must be positive".into()));
        }
        self.detector.validate()?;
        if let InitialSpec::Preset(name) = &self.initial {
            if name != "sec6" {
                return Err(Error::Config(format!("unknown initial preset '{name}'")));
            }
        }
        match &self.flux {
            FluxSpec::Polynomial(c) if c.len() < 2 => {
                return Err(Error::Config("polynomial flux needs degree >= 1".into()))
            }
            _ => {}
        }
        Ok(())
    }

    /// Mesh width of the background grid.
    pub fn h(&self) -> f64 {
        (self.domain[1] - self.domain[0]) / self.cells as f64
    }

    pub fn quadrature(&self) -> usize {
        self.quadrature_nodes.unwrap_or(self.degree + 3)
    }

    /// Initial data as one-sided functions (left of the shock, right of it).
    pub fn initial_fns(&self) -> (Box<dyn Fn(f64) -> f64>, Box<dyn Fn(f64) -> f64>) {
        match &self.initial {
            InitialSpec::Preset(_) => (
                Box::new(|x: f64| 1.2 + 0.4 * (x / 1.4).sin().powi(4)),
                Box::new(|x: f64| 0.8 - 0.3 * ((x - 3.1) / 0.85).sin()),
            ),
            InitialSpec::PiecewisePolynomial { left, right } => {
                let (l, r) = (left.clone(), right.clone());
                (
                    Box::new(move |x| crate::poly::eval(&l, x)),
                    Box::new(move |x| crate::poly::eval(&r, x)),
                )
            }
        }
    }

    /// Range of the initial and boundary data, by dense sampling.
    pub fn data_range(&self) -> (f64, f64) {
        let (fl, fr) = self.initial_fns();
        let [a, b] = self.domain;
        let xs = self.shock_position;
        let mut lo = self.inflow;
        let mut hi = self.inflow;
        let n = 4096;
        for k in 0..=n {
            let t = k as f64 / n as f64;
            let xl = a + (xs - a) * t;
            let xr = xs + (b - xs) * t;
            for v in [fl(xl), fr(xr)] {
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        (lo, hi)
    }

    /// Flux model with the admissible interval padded around the data range.
    pub fn build_flux(&self) -> Result<FluxModel> {
        let (lo, hi) = self.data_range();
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::Config(format!(
                "initial data range [{lo}, {hi}] is degenerate"
            )));
        }
        let pad = self.admissible_margin * (hi - lo);
        let (alo, ahi) = (lo - pad, hi + pad);
        match &self.flux {
            FluxSpec::Burgers => FluxModel::burgers(alo, ahi),
            FluxSpec::Polynomial(c) => FluxModel::polynomial(c, alo, ahi),
        }
    }

    /// Largest wave speed over the data range (the CFL beta).
    pub fn beta(&self) -> Result<f64> {
        let flux = self.build_flux()?;
        let (lo, hi) = self.data_range();
        flux.max_wave_speed(lo.abs().max(hi.abs()))
    }

    pub fn build_discretization(&self) -> Result<Discretization> {
        Discretization::new(
            self.build_flux()?,
            Inflow::Constant(self.inflow),
            self.degree,
            self.quadrature(),
            self.height_floor,
            self.neglect_shock_correction,
        )
    }

    /// L2 projection of the initial data onto the shock mesh at t = 0.
    ///
    /// The shock position splits its cell; every cell strictly left of
    /// it projects the left function, every cell right of it the right
    /// one, so the discontinuity is honored exactly.
    pub fn build_initial_state(&self) -> Result<ShockState> {
        self.validate()?;
        let [a, b] = self.domain;
        let mesh = ShockMesh::new(a, b, self.cells, self.shock_position)?;
        let (fl, fr) = self.initial_fns();
        let rule = gauss_rule(self.quadrature())?;
        let mut cells = Vec::with_capacity(mesh.cell_count());
        for slot in 0..mesh.cell_count() {
            let (lo, hi) = mesh.interval(slot);
            let f: &dyn Fn(f64) -> f64 = if slot <= mesh.left_slot() { &fl } else { &fr };
            let mut g = |x: f64| f(x);
            cells.push(project_function(&mut g, lo, hi, self.degree, &rule)?);
        }
        let state = ShockState {
            mesh,
            cells,
            time: 0.0,
        };
        let disc = self.build_discretization()?;
        // Fail fast if the projected data already violates admissibility
        // or the height floor.
        disc.rh_speed(&state)?;
        Ok(state)
    }

    /// The bundled benchmark configuration at mesh width h.
    pub fn sec6(h: f64, tau: Option<f64>, end_time: f64) -> Result<RunConfig> {
        if !(h > 0.0) {
            return Err(Error::Config(format!("mesh width {h} must be positive")));
        }
        let m = (10.0 / h).round();
        if (10.0 / h - m).abs() > 1e-9 * m || m < 6.0 {
            return Err(Error::Config(format!(
                "mesh width {h} does not divide the domain length 10"
            )));
        }
        let mut cfg = RunConfig {
            cells: m as usize,
            end_time,
            ..RunConfig::default()
        };
        cfg.policy.tau = tau;
        cfg.validate()?;
        Ok(cfg)
    }
}
