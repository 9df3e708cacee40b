//! Semi-discrete DG operator on the shock-fitted mesh, plus exact and
//! finite-difference time derivatives of the resulting ODE system.
//!
//! The state is W = (x_sc, all modal coefficients). Its evolution is
//! the method-of-lines system W' = Psi(W):
//!
//! * regular cell: (u_t, v) = (f(u), v_x) + f(u_up) v(left) - f(u(right^-)) v(right),
//!   with the upwind trace u_up taken from the left neighbour (or the
//!   inflow value u_a(t) on the first cell);
//! * Omega_L: the outflow trace is its own value at x_sc^-, and because
//!   the cell deforms with the shock, the coefficient rates pick up the
//!   geometric term -((d xi/dt) u_xi, v) from the moving map;
//! * Omega_R: the left trace is its own value at x_sc^+ (no information
//!   crosses the shock) and the analogous geometric term applies;
//! * the shock point obeys Rankine-Hugoniot: x_sc' = [f(u)]/[u] from
//!   the one-sided traces.
//!
//! Beyond Psi itself, this module produces the Eulerian time
//! derivatives of the solution polynomial needed by the temporal
//! smoothness report: order 1 exactly, order 2 from a second weak form
//! (differentiating the scheme in time, including the shock-motion
//! boundary corrections), and orders 3-4 from nested central
//! differences of Psi along the flow direction. Conversion between
//! derivatives of W and Eulerian derivatives on the two moving cells
//! runs through truncated Taylor series of the reference map.

use crate::error::{Error, Result};
use crate::flux::FluxModel;
use crate::jet::{legendre_jets, Jet};
use crate::polykernel::{gauss_rule, legendre_eval, ModalPoly, QuadratureRule};
use crate::shockmesh::ShockMesh;

/// Boundary data at the inflow end x = a.
#[derive(Debug, Clone)]
pub enum Inflow {
    Constant(f64),
}

impl Inflow {
    pub fn value(&self, _t: f64) -> f64 {
        match self {
            Inflow::Constant(v) => *v,
        }
    }

    /// Time derivative of the boundary data.
    pub fn rate(&self, _t: f64) -> f64 {
        match self {
            Inflow::Constant(_) => 0.0,
        }
    }
}

/// Discrete solution: mesh layout plus one modal polynomial per slot.
#[derive(Debug, Clone)]
pub struct ShockState {
    pub mesh: ShockMesh,
    pub cells: Vec<ModalPoly>,
    pub time: f64,
}

impl ShockState {
    pub fn degree(&self) -> usize {
        self.cells[0].degree()
    }

    /// Trace u(x_sc^-) from Omega_L.
    pub fn left_shock_trace(&self) -> f64 {
        self.cells[self.mesh.left_slot()].coeffs().iter().sum()
    }

    /// Trace u(x_sc^+) from Omega_R.
    pub fn right_shock_trace(&self) -> f64 {
        alternating_sum(self.cells[self.mesh.right_slot()].coeffs())
    }

    /// Largest coefficient magnitude, including the shock position.
    pub fn max_abs(&self) -> f64 {
        let mut m = self.mesh.x_shock().abs();
        for c in &self.cells {
            for &v in c.coeffs() {
                m = m.max(v.abs());
            }
        }
        m
    }

    /// Linear combination of states plus an optional derivative term.
    ///
    /// Computes sum_j a_j W_j (+ c * D) componentwise in the flat vector
    /// (x_sc, coefficients); the special-cell intervals are rebuilt from
    /// the combined shock position without re-projection. All states
    /// must share the mesh layout (same shock cell).
    pub fn combine(
        parts: &[(f64, &ShockState)],
        deriv: Option<(f64, &StateDerivative)>,
        time: f64,
    ) -> Result<ShockState> {
        let base = parts[0].1;
        let index = base.mesh.shock_index();
        debug_assert!(parts.iter().all(|(_, s)| s.mesh.shock_index() == index));

        let mut x = 0.0;
        for (a, s) in parts {
            x += a * s.mesh.x_shock();
        }
        if let Some((c, d)) = deriv {
            x += c * d.shock_speed;
        }
        let mesh = base.mesh.with_shock_at(x)?;

        let n = base.cells.len();
        let p = base.degree();
        let mut cells = Vec::with_capacity(n);
        for slot in 0..n {
            let mut coeffs = vec![0.0; p + 1];
            for (a, s) in parts {
                for (k, c) in coeffs.iter_mut().enumerate() {
                    *c += a * s.cells[slot].coeffs()[k];
                }
            }
            if let Some((c, d)) = deriv {
                for (k, v) in coeffs.iter_mut().enumerate() {
                    *v += c * d.coeffs[slot][k];
                }
            }
            let (lo, hi) = mesh.interval(slot);
            cells.push(ModalPoly::new(lo, hi, coeffs)?);
        }
        Ok(ShockState { mesh, cells, time })
    }

    /// State shifted by `eps` times a derivative (used by the FD ladder).
    pub fn offset(&self, d: &StateDerivative, eps: f64) -> Result<ShockState> {
        ShockState::combine(&[(1.0, self)], Some((eps, d)), self.time)
    }
}

fn alternating_sum(coeffs: &[f64]) -> f64 {
    coeffs
        .iter()
        .enumerate()
        .map(|(k, &c)| if k % 2 == 0 { c } else { -c })
        .sum()
}

/// Image of a state under the semi-discrete operator (or a higher
/// derivative of the trajectory): shock rate plus coefficient rates.
#[derive(Debug, Clone)]
pub struct StateDerivative {
    pub shock_speed: f64,
    pub coeffs: Vec<Vec<f64>>,
}

impl StateDerivative {
    pub fn max_abs(&self) -> f64 {
        let mut m = self.shock_speed.abs();
        for cell in &self.coeffs {
            for &v in cell {
                m = m.max(v.abs());
            }
        }
        m
    }

    /// (self - other) / scale, componentwise.
    fn central_difference(&self, other: &Self, scale: f64) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y) / scale).collect())
            .collect();
        StateDerivative {
            shock_speed: (self.shock_speed - other.shock_speed) / scale,
            coeffs,
        }
    }
}

/// One-sided data at the shock used by the second-derivative forms.
struct ShockTraces {
    u_minus: f64,
    u_plus: f64,
    ut_minus: f64,
    ut_plus: f64,
    ux_minus: f64,
    ux_plus: f64,
}

/// Eulerian second time derivative: shock acceleration plus one
/// polynomial per cell.
#[derive(Debug, Clone)]
pub struct SecondDerivative {
    pub shock_accel: f64,
    pub cells: Vec<ModalPoly>,
}

/// Eulerian time derivatives of the solution up to a requested order.
#[derive(Debug, Clone)]
pub struct TemporalDerivatives {
    pub orders: usize,
    /// shock[l] = l-th time derivative of x_sc (signed); shock[0] = x_sc.
    pub shock: Vec<f64>,
    /// cells[l][slot] = Eulerian (d/dt)^l of the solution polynomial.
    pub cells: Vec<Vec<ModalPoly>>,
}

/// Which of the two deforming cells a computation refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    Left,
    Right,
}

/// The semi-discrete operator: flux, inflow data, quadrature, and the
/// tolerances that decide when a state has stopped being meaningful.
#[derive(Debug, Clone)]
pub struct Discretization {
    flux: FluxModel,
    inflow: Inflow,
    rule: QuadratureRule,
    degree: usize,
    height_floor: f64,
    neglect_shock_correction: bool,
    /// pval[k][i] = P_k at rule node i; pder[k][i] = P_k' there.
    pval: Vec<Vec<f64>>,
    pder: Vec<Vec<f64>>,
}

impl Discretization {
    pub fn new(
        flux: FluxModel,
        inflow: Inflow,
        degree: usize,
        quad_nodes: usize,
        height_floor: f64,
        neglect_shock_correction: bool,
    ) -> Result<Self> {
        if degree < 2 {
            return Err(Error::Config(format!(
                "polynomial degree {degree} too low; the tracker needs degree >= 2"
            )));
        }
        if quad_nodes < degree + 1 {
            return Err(Error::Config(format!(
                "{quad_nodes} quadrature nodes cannot integrate degree-{degree} cells"
            )));
        }
        if !(height_floor > 0.0) {
            return Err(Error::Config("height floor must be positive".into()));
        }
        let rule = gauss_rule(quad_nodes)?;
        let mut pval = vec![vec![0.0; quad_nodes]; degree + 1];
        let mut pder = vec![vec![0.0; quad_nodes]; degree + 1];
        for (i, &xi) in rule.nodes().iter().enumerate() {
            for k in 0..=degree {
                pval[k][i] = legendre_eval(k, xi, 0);
                pder[k][i] = legendre_eval(k, xi, 1);
            }
        }
        Ok(Self {
            flux,
            inflow,
            rule,
            degree,
            height_floor,
            neglect_shock_correction,
            pval,
            pder,
        })
    }

    pub fn flux(&self) -> &FluxModel {
        &self.flux
    }

    pub fn inflow(&self) -> &Inflow {
        &self.inflow
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn height_floor(&self) -> f64 {
        self.height_floor
    }

    pub fn neglects_shock_correction(&self) -> bool {
        self.neglect_shock_correction
    }

    /// Rankine-Hugoniot speed from the one-sided shock traces.
    pub fn rh_speed(&self, state: &ShockState) -> Result<f64> {
        let um = state.left_shock_trace();
        let up = state.right_shock_trace();
        let height = um - up;
        if !(height.abs() >= self.height_floor) {
            return Err(Error::DegenerateShock {
                time: state.time,
                height,
                floor: self.height_floor,
            });
        }
        let fm = self.flux_at(um, 0, state.mesh.left_slot(), state.mesh.x_shock())?;
        let fp = self.flux_at(up, 0, state.mesh.right_slot(), state.mesh.x_shock())?;
        Ok((fm - fp) / height)
    }

    /// Lax admissibility f'(u^-) > s > f'(u^+) at the current state.
    pub fn lax_condition(&self, state: &ShockState) -> Result<bool> {
        let s = self.rh_speed(state)?;
        let cm = self.flux.eval(state.left_shock_trace(), 1)?;
        let cp = self.flux.eval(state.right_shock_trace(), 1)?;
        Ok(cm > s && s > cp)
    }

    /// Flux evaluation with blowup attribution to a cell and position.
    fn flux_at(&self, u: f64, order: usize, slot: usize, x: f64) -> Result<f64> {
        self.flux.eval(u, order).map_err(|e| match e {
            Error::OutOfRange { value, lo, hi } => Error::Blowup {
                cell: slot,
                x,
                value,
                lo,
                hi,
            },
            other => other,
        })
    }

    /// Nodal values of a cell polynomial at the rule nodes.
    fn nodal_values(&self, cell: &ModalPoly) -> Vec<f64> {
        self.nodal_dot(cell.coeffs(), &self.pval)
    }

    /// Nodal values of the xi-derivative at the rule nodes.
    fn nodal_xi_derivs(&self, cell: &ModalPoly) -> Vec<f64> {
        self.nodal_dot(cell.coeffs(), &self.pder)
    }

    fn nodal_dot(&self, coeffs: &[f64], table: &[Vec<f64>]) -> Vec<f64> {
        let q = self.rule.len();
        let mut out = vec![0.0; q];
        for (k, &c) in coeffs.iter().enumerate() {
            for (o, &t) in out.iter_mut().zip(&table[k]) {
                *o += c * t;
            }
        }
        out
    }

    /// Modal coefficients of the degree-p interpolant of nodal values.
    ///
    /// Exact whenever the values come from a polynomial of degree <= p,
    /// since the rule integrates degree 2p.
    fn project_nodal(&self, values: &[f64]) -> Vec<f64> {
        let mut coeffs = vec![0.0; self.degree + 1];
        for (k, c) in coeffs.iter_mut().enumerate() {
            let mut acc = 0.0;
            for ((&v, &w), &pk) in values
                .iter()
                .zip(self.rule.weights())
                .zip(&self.pval[k])
            {
                acc += v * w * pk;
            }
            *c = acc * (2 * k + 1) as f64 / 2.0;
        }
        coeffs
    }

    /// Coefficient rates for one regular cell given its upwind trace.
    pub fn dg_rhs_regular(&self, cell: &ModalPoly, upwind_trace: f64, slot: usize) -> Result<Vec<f64>> {
        let (lo, hi) = cell.interval();
        let values = self.nodal_values(cell);
        self.check_admissible(&values, slot, lo, hi)?;
        let f_up = self.flux_at(upwind_trace, 0, slot, lo)?;
        let u_right: f64 = cell.coeffs().iter().sum();
        let f_right = self.flux_at(u_right, 0, slot, hi)?;

        let mut fvals = Vec::with_capacity(values.len());
        for (&u, &xi) in values.iter().zip(self.rule.nodes()) {
            fvals.push(self.flux_at(u, 0, slot, self.node_x(lo, hi, xi))?);
        }
        let w = hi - lo;
        let mut rates = vec![0.0; self.degree + 1];
        for (k, r) in rates.iter_mut().enumerate() {
            let vol: f64 = fvals
                .iter()
                .zip(self.rule.weights())
                .zip(&self.pder[k])
                .map(|((&f, &wt), &dp)| f * wt * dp)
                .sum();
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            *r = (2 * k + 1) as f64 / w * (vol + f_up * sign - f_right);
        }
        Ok(rates)
    }

    /// Coefficient rates for the special pair (Omega_L, Omega_R).
    ///
    /// Both cells deform with the shock, so on top of the weak form each
    /// rate subtracts the geometric inner product ((d xi/dt) u_xi, P_k):
    /// with s = shock speed, d xi/dt is -(xi+1) s/|Omega_L| on the left
    /// cell and (xi-1) s/|Omega_R| on the right one.
    pub fn dg_rhs_special(
        &self,
        state: &ShockState,
        shock_speed: f64,
    ) -> Result<(Vec<f64>, Vec<f64>)> {
        let mesh = &state.mesh;
        let left = &state.cells[mesh.left_slot()];
        let right = &state.cells[mesh.right_slot()];
        let upwind_left: f64 = state.cells[mesh.left_slot() - 1].coeffs().iter().sum();

        let left_rates = self.special_rates(left, upwind_left, shock_speed, Side::Left, mesh)?;
        let upwind_right = alternating_sum(right.coeffs());
        let right_rates =
            self.special_rates(right, upwind_right, shock_speed, Side::Right, mesh)?;
        Ok((left_rates, right_rates))
    }

    fn special_rates(
        &self,
        cell: &ModalPoly,
        upwind_trace: f64,
        shock_speed: f64,
        side: Side,
        mesh: &ShockMesh,
    ) -> Result<Vec<f64>> {
        let slot = match side {
            Side::Left => mesh.left_slot(),
            Side::Right => mesh.right_slot(),
        };
        let (lo, hi) = cell.interval();
        let w = hi - lo;
        let values = self.nodal_values(cell);
        self.check_admissible(&values, slot, lo, hi)?;
        let xi_derivs = self.nodal_xi_derivs(cell);
        let f_up = self.flux_at(upwind_trace, 0, slot, lo)?;
        let u_right: f64 = cell.coeffs().iter().sum();
        let f_right = self.flux_at(u_right, 0, slot, hi)?;
        let mut fvals = Vec::with_capacity(values.len());
        for (&u, &xi) in values.iter().zip(self.rule.nodes()) {
            fvals.push(self.flux_at(u, 0, slot, self.node_x(lo, hi, xi))?);
        }

        let mut rates = vec![0.0; self.degree + 1];
        for (k, r) in rates.iter_mut().enumerate() {
            let mut vol = 0.0;
            let mut geo = 0.0;
            for (i, &xi) in self.rule.nodes().iter().enumerate() {
                let wt = self.rule.weights()[i];
                vol += fvals[i] * wt * self.pder[k][i];
                let stretch = match side {
                    Side::Left => -(xi + 1.0),
                    Side::Right => xi - 1.0,
                };
                geo += wt * stretch * xi_derivs[i] * self.pval[k][i];
            }
            geo *= shock_speed / 2.0;
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            *r = (2 * k + 1) as f64 / w * (vol + f_up * sign - f_right - geo);
        }
        Ok(rates)
    }

    /// The full semi-discrete operator Psi at boundary time `t`.
    pub fn rhs(&self, state: &ShockState, t: f64) -> Result<StateDerivative> {
        let mesh = &state.mesh;
        let speed = self.rh_speed(state)?;
        let (left_rates, right_rates) = self.dg_rhs_special(state, speed)?;

        let n = state.cells.len();
        let mut coeffs = Vec::with_capacity(n);
        for slot in 0..n {
            if slot == mesh.left_slot() {
                coeffs.push(left_rates.clone());
            } else if slot == mesh.right_slot() {
                coeffs.push(right_rates.clone());
            } else {
                let upwind = if slot == 0 {
                    self.inflow.value(t)
                } else {
                    state.cells[slot - 1].coeffs().iter().sum()
                };
                coeffs.push(self.dg_rhs_regular(&state.cells[slot], upwind, slot)?);
            }
        }
        Ok(StateDerivative {
            shock_speed: speed,
            coeffs,
        })
    }

    /// Eulerian u_t per cell for a given state derivative.
    ///
    /// On regular cells this is just the coefficient rates; on the
    /// special pair the chain-rule term (d xi/dt) u_xi is added, which
    /// keeps the result a degree-p polynomial.
    pub fn eulerian_ut(&self, state: &ShockState, d: &StateDerivative) -> Result<Vec<ModalPoly>> {
        let mesh = &state.mesh;
        let s = d.shock_speed;
        let mut out = Vec::with_capacity(state.cells.len());
        for (slot, cell) in state.cells.iter().enumerate() {
            let (lo, hi) = cell.interval();
            let special = slot == mesh.left_slot() || slot == mesh.right_slot();
            if !special {
                out.push(ModalPoly::new(lo, hi, d.coeffs[slot].clone())?);
                continue;
            }
            let w = hi - lo;
            let xi_derivs = self.nodal_xi_derivs(cell);
            let rate_vals = self.nodal_dot(&d.coeffs[slot], &self.pval);
            let mut values = vec![0.0; self.rule.len()];
            for (i, &xi) in self.rule.nodes().iter().enumerate() {
                let xi_t = if slot == mesh.left_slot() {
                    -(xi + 1.0) * s / w
                } else {
                    (xi - 1.0) * s / w
                };
                values[i] = rate_vals[i] + xi_t * xi_derivs[i];
            }
            out.push(ModalPoly::new(lo, hi, self.project_nodal(&values))?);
        }
        Ok(out)
    }

    fn shock_traces(&self, state: &ShockState, ut: &[ModalPoly]) -> Result<ShockTraces> {
        let mesh = &state.mesh;
        let x = mesh.x_shock();
        Ok(ShockTraces {
            u_minus: state.left_shock_trace(),
            u_plus: state.right_shock_trace(),
            ut_minus: ut[mesh.left_slot()].eval(x, 0)?,
            ut_plus: ut[mesh.right_slot()].eval(x, 0)?,
            ux_minus: state.cells[mesh.left_slot()].eval(x, 1)?,
            ux_plus: state.cells[mesh.right_slot()].eval(x, 1)?,
        })
    }

    /// Exact Eulerian second derivative (u_tt per cell, shock acceleration).
    ///
    /// Obtained by differentiating the scheme in time: the weak form for
    /// u_tt transports u_t with speed f'(u), and on the special pair the
    /// shock motion contributes the boundary correction
    /// -+ [u_t + f'(u) u_x](x_sc^-+) * x_sc' * v(x_sc), which can be
    /// switched off to expose its size. The acceleration follows from
    /// differentiating Rankine-Hugoniot.
    pub fn second_time_derivative(&self, state: &ShockState, t: f64) -> Result<SecondDerivative> {
        let d1 = self.rhs(state, t)?;
        self.second_with(state, t, &d1)
    }

    fn second_with(
        &self,
        state: &ShockState,
        t: f64,
        d1: &StateDerivative,
    ) -> Result<SecondDerivative> {
        let mesh = &state.mesh;
        let s = d1.shock_speed;
        let ut = self.eulerian_ut(state, d1)?;
        let tr = self.shock_traces(state, &ut)?;

        let n = state.cells.len();
        let mut cells = Vec::with_capacity(n);
        for slot in 0..n {
            let cell = &state.cells[slot];
            let (lo, hi) = cell.interval();
            let w = hi - lo;
            let uvals = self.nodal_values(cell);
            let utvals = self.nodal_values(&ut[slot]);

            // Upwind (u, u_t) pair entering through the left endpoint.
            let (up_u, up_ut) = if slot == 0 {
                (self.inflow.value(t), self.inflow.rate(t))
            } else if slot == mesh.right_slot() {
                (tr.u_plus, tr.ut_plus)
            } else {
                let prev = slot - 1;
                (
                    state.cells[prev].coeffs().iter().sum(),
                    ut[prev].coeffs().iter().sum(),
                )
            };
            let own_u: f64 = cell.coeffs().iter().sum();
            let own_ut: f64 = ut[slot].coeffs().iter().sum();

            let fp_up = self.flux_at(up_u, 1, slot, lo)?;
            let fp_own = self.flux_at(own_u, 1, slot, hi)?;

            let mut correction_left = 0.0;
            let mut correction_right = 0.0;
            if !self.neglect_shock_correction {
                if slot == mesh.left_slot() {
                    let fp = self.flux.eval(tr.u_minus, 1)?;
                    correction_right = (tr.ut_minus + fp * tr.ux_minus) * s;
                }
                if slot == mesh.right_slot() {
                    let fp = self.flux.eval(tr.u_plus, 1)?;
                    correction_left = (tr.ut_plus + fp * tr.ux_plus) * s;
                }
            }

            let mut fp_vals = Vec::with_capacity(self.rule.len());
            for (i, &u) in uvals.iter().enumerate() {
                let x = self.node_x(lo, hi, self.rule.nodes()[i]);
                fp_vals.push(self.flux_at(u, 1, slot, x)?);
            }
            let mut coeffs = vec![0.0; self.degree + 1];
            for (k, c) in coeffs.iter_mut().enumerate() {
                let mut vol = 0.0;
                for i in 0..self.rule.len() {
                    vol += fp_vals[i] * utvals[i] * self.rule.weights()[i] * self.pder[k][i];
                }
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                let base = vol + (fp_up * up_ut + correction_left) * sign
                    - (fp_own * own_ut + correction_right);
                *c = (2 * k + 1) as f64 / w * base;
            }
            cells.push(ModalPoly::new(lo, hi, coeffs)?);
        }

        // Differentiated Rankine-Hugoniot. The brackets combine u_t with
        // u_x through the shock speed (a material derivative along the
        // shock path), not through the characteristic speed.
        let cm = self.flux.eval(tr.u_minus, 1)?;
        let cp = self.flux.eval(tr.u_plus, 1)?;
        let num = (cm - s) * (tr.ut_minus + tr.ux_minus * s)
            + (s - cp) * (tr.ut_plus + tr.ux_plus * s);
        let shock_accel = num / (tr.u_minus - tr.u_plus);

        Ok(SecondDerivative { shock_accel, cells })
    }

    /// Trajectory derivatives of W by nested central differences of Psi
    /// along the flow direction: level 2 approximates Psi' Psi, level 3
    /// differentiates the level-2 function along the flow, and so on.
    ///
    /// Each nesting level divides by its epsilon, so the inner steps
    /// must shrink with depth: the defaults balance roundoff carried up
    /// from below against truncation at each level.
    fn w_ladder(&self, state: &ShockState, t: f64, upto: usize) -> Result<Vec<StateDerivative>> {
        let d1 = self.rhs(state, t)?;
        let mut scale = (state.max_abs().max(1.0) / d1.max_abs().max(1e-12)).clamp(1e-2, 1e2);
        // The nested probes shift the shock by up to (eps2+eps3+eps4)*|s|
        // in total; right after a transition the left special cell is
        // only h wide, so cap the schedule to keep the deepest probe
        // stack inside the representable window.
        let mesh = &state.mesh;
        let i = mesh.shock_index();
        let room = (mesh.x_shock() - mesh.boundary(i - 1))
            .min(mesh.boundary(i + 2) - mesh.x_shock());
        let max_shift = (EPS_LEVEL2 + EPS_LEVEL3 + EPS_LEVEL4) * d1.shock_speed.abs().max(1e-9);
        scale = scale.min(0.4 * room / max_shift);
        let mut out = vec![d1];
        if upto >= 2 {
            out.push(self.fd_level2(state, t, scale)?);
        }
        if upto >= 3 {
            out.push(self.fd_level3(state, t, scale)?);
        }
        if upto >= 4 {
            let eps = EPS_LEVEL4 * scale;
            let d1 = &out[0];
            let plus = state.offset(d1, eps)?;
            let minus = state.offset(d1, -eps)?;
            let a = self.fd_level3(&plus, t + eps, scale)?;
            let b = self.fd_level3(&minus, t - eps, scale)?;
            out.push(a.central_difference(&b, 2.0 * eps));
        }
        Ok(out)
    }

    fn fd_level2(&self, v: &ShockState, t: f64, scale: f64) -> Result<StateDerivative> {
        let eps = EPS_LEVEL2 * scale;
        let dir = self.rhs(v, t)?;
        let fp = self.rhs(&v.offset(&dir, eps)?, t + eps)?;
        let fm = self.rhs(&v.offset(&dir, -eps)?, t - eps)?;
        Ok(fp.central_difference(&fm, 2.0 * eps))
    }

    fn fd_level3(&self, v: &ShockState, t: f64, scale: f64) -> Result<StateDerivative> {
        let eps = EPS_LEVEL3 * scale;
        let dir = self.rhs(v, t)?;
        let a = self.fd_level2(&v.offset(&dir, eps)?, t + eps, scale)?;
        let b = self.fd_level2(&v.offset(&dir, -eps)?, t - eps, scale)?;
        Ok(a.central_difference(&b, 2.0 * eps))
    }

    /// FD counterpart of `second_time_derivative` (same Eulerian form),
    /// for cross-checking the exact weak-form route.
    pub fn second_derivative_fd(&self, state: &ShockState, t: f64) -> Result<SecondDerivative> {
        let ws = self.w_ladder(state, t, 2)?;
        let cells = self.eulerian_from_ws(state, &ws, 2)?;
        Ok(SecondDerivative {
            shock_accel: ws[1].shock_speed,
            cells: cells.into_iter().nth(2).unwrap(),
        })
    }

    /// Eulerian derivative polynomials of orders 0..=kmax from the
    /// trajectory derivatives of W.
    ///
    /// Regular cells read the coefficients directly. On the special pair
    /// the reference coordinate of a fixed point is a rational series in
    /// time, so the solution value is composed as a truncated Taylor
    /// series at each quadrature node and re-projected per order; for
    /// derivatives of a degree-p polynomial map this is exact.
    fn eulerian_from_ws(
        &self,
        state: &ShockState,
        ws: &[StateDerivative],
        kmax: usize,
    ) -> Result<Vec<Vec<ModalPoly>>> {
        let mesh = &state.mesh;
        let mut out = vec![Vec::with_capacity(state.cells.len()); kmax + 1];
        let mut shock_derivs = vec![mesh.x_shock()];
        for w in ws.iter().take(kmax) {
            shock_derivs.push(w.shock_speed);
        }
        let xs_jet = Jet::from_derivs(&shock_derivs);

        for (slot, cell) in state.cells.iter().enumerate() {
            let (lo, hi) = cell.interval();
            if slot != mesh.left_slot() && slot != mesh.right_slot() {
                out[0].push(cell.clone());
                for l in 1..=kmax {
                    out[l].push(ModalPoly::new(lo, hi, ws[l - 1].coeffs[slot].clone())?);
                }
                continue;
            }

            // Coefficient jets c_k(t).
            let mut coeff_jets = Vec::with_capacity(self.degree + 1);
            for k in 0..=self.degree {
                let mut d = vec![cell.coeffs()[k]];
                for w in ws.iter().take(kmax) {
                    d.push(w.coeffs[slot][k]);
                }
                coeff_jets.push(Jet::from_derivs(&d));
            }

            let mut values = vec![vec![0.0; self.rule.len()]; kmax + 1];
            for (i, &xi) in self.rule.nodes().iter().enumerate() {
                let x = self.node_x(lo, hi, xi);
                let xi_jet = if slot == mesh.left_slot() {
                    // xi(t) = 2 (x - lo) / (x_sc(t) - lo) - 1, lo fixed.
                    let len = xs_jet.sub(&Jet::constant(lo));
                    len.recip()
                        .scale(2.0 * (x - lo))
                        .sub(&Jet::constant(1.0))
                } else {
                    // xi(t) = 2 (x - x_sc(t)) / (hi - x_sc(t)) - 1, hi fixed.
                    let num = Jet::constant(x).sub(&xs_jet);
                    let den = Jet::constant(hi).sub(&xs_jet);
                    num.mul(&den.recip()).scale(2.0).sub(&Jet::constant(1.0))
                };
                let basis = legendre_jets(self.degree, &xi_jet);
                let mut u = Jet::constant(0.0);
                for (c, b) in coeff_jets.iter().zip(&basis) {
                    u = u.add(&c.mul(b));
                }
                for (l, row) in values.iter_mut().enumerate() {
                    row[i] = u.deriv(l);
                }
            }
            for (l, row) in values.iter().enumerate() {
                out[l].push(ModalPoly::new(lo, hi, self.project_nodal(row))?);
            }
        }
        Ok(out)
    }

    /// Eulerian time derivatives up to `orders` (at most 4).
    ///
    /// Order 1 is exact, order 2 comes from the differentiated weak
    /// form, orders 3 and 4 from the FD ladder composed through the
    /// moving-cell map.
    pub fn temporal_derivatives(
        &self,
        state: &ShockState,
        t: f64,
        orders: usize,
    ) -> Result<TemporalDerivatives> {
        if orders > 4 {
            return Err(Error::Argument(format!(
                "temporal derivative order {orders} beyond 4"
            )));
        }
        let mut shock = vec![state.mesh.x_shock()];
        let mut cells = vec![state.cells.clone()];
        if orders == 0 {
            return Ok(TemporalDerivatives {
                orders,
                shock,
                cells,
            });
        }

        let ws = self.w_ladder(state, t, orders)?;
        let d1 = &ws[0];
        shock.push(d1.shock_speed);
        cells.push(self.eulerian_ut(state, d1)?);

        if orders >= 2 {
            let exact = self.second_with(state, t, d1)?;
            shock.push(exact.shock_accel);
            cells.push(exact.cells);
        }
        if orders >= 3 {
            let higher = self.eulerian_from_ws(state, &ws, orders)?;
            for (l, polys) in higher.into_iter().enumerate() {
                if l >= 3 {
                    shock.push(ws[l - 1].shock_speed);
                    cells.push(polys);
                }
            }
        }
        Ok(TemporalDerivatives {
            orders,
            shock,
            cells,
        })
    }

    fn node_x(&self, lo: f64, hi: f64, xi: f64) -> f64 {
        0.5 * (lo + hi) + 0.5 * (hi - lo) * xi
    }

    fn check_admissible(&self, values: &[f64], slot: usize, lo: f64, hi: f64) -> Result<()> {
        let (alo, ahi) = self.flux.admissible();
        for (&v, &xi) in values.iter().zip(self.rule.nodes()) {
            if !(v >= alo && v <= ahi) {
                return Err(Error::Blowup {
                    cell: slot,
                    x: self.node_x(lo, hi, xi),
                    value: v,
                    lo: alo,
                    hi: ahi,
                });
            }
        }
        Ok(())
    }
}

/// Central-difference step sizes for the FD ladder. Level 2 balances
/// f64 roundoff against second-order truncation; each further level
/// inherits the noise of the one below divided by its own epsilon, so
/// the steps grow roughly like the cube root of the inherited noise.
const EPS_LEVEL2: f64 = 1e-6;
const EPS_LEVEL3: f64 = 4e-4;
const EPS_LEVEL4: f64 = 5e-3;

/// Rate of change of the total integral of the state, combining the
/// coefficient rates with the moving-boundary contributions of the
/// special pair.
pub fn total_mass_rate(state: &ShockState, d: &StateDerivative) -> f64 {
    let mesh = &state.mesh;
    let s = d.shock_speed;
    let mut rate = 0.0;
    for (slot, cell) in state.cells.iter().enumerate() {
        let w = cell.width();
        rate += d.coeffs[slot][0] * w;
        if slot == mesh.left_slot() {
            rate += cell.mean() * s;
        } else if slot == mesh.right_slot() {
            rate -= cell.mean() * s;
        }
    }
    rate
}
