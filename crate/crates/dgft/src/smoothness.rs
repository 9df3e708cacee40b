//! Numerical smoothness reports: one-sided derivative jumps at cell
//! boundaries, scaled jump indicators, temporal derivative magnitudes,
//! an anti-smoothing detector, and the a-priori bound on the transition
//! projection error.
//!
//! At a boundary x_j the indicator records the one-sided limits
//! M^l (from the right) and L^l (from the left) of the l-th spatial
//! derivative, their jump J^l = M^l - L^l, and the scaled jump
//!
//!   D^l = J^l / h^(p + 2 - l (1 + alpha)),   alpha = 1/p.
//!
//! For a smooth numerical solution every D^l stays O(1) as h shrinks;
//! a violation of the strengthened CFL condition announces itself as
//! rapid growth of |D^l| with alternating signs, which is what the
//! detector looks for. Boundaries at and next to the special pair are
//! exempt from detection: the jumps there measure shock structure and
//! swing legitimately as the shock passes.
//!
//! The boundaries reported are those of the regular
//! cells plus the special-cell ends x_(i-1) and x_(i+2); the two
//! interfaces hidden inside the special pair do not exist in the
//! discretization. At the inflow boundary only the value of the
//! exterior data is known, so jumps of the derivatives are not reported
//! there. One extra row records the one-sided derivatives M_s^l just
//! behind the shock.

use crate::error::{Error, Result};
use crate::polykernel::{gauss_rule, ModalPoly};
use crate::semidiscrete::{Discretization, ShockState};
use serde::{Deserialize, Serialize};

/// Jump data at one reported boundary. Entries that are not defined
/// (derivative jumps at the inflow boundary) are NaN.
#[derive(Debug, Clone)]
pub struct IndicatorRow {
    /// Background grid index j of the boundary x_j.
    pub boundary: usize,
    pub x: f64,
    /// One-sided limits from the right, orders 0..=p.
    pub m: Vec<f64>,
    /// One-sided limits from the left.
    pub l: Vec<f64>,
    /// Jumps m - l.
    pub jump: Vec<f64>,
    /// Scaled jumps D^l.
    pub d: Vec<f64>,
}

/// Spatial smoothness report for one accepted state.
#[derive(Debug, Clone)]
pub struct SpatialIndicator {
    pub step: usize,
    pub time: f64,
    pub alpha: f64,
    pub rows: Vec<IndicatorRow>,
    /// Position and one-sided derivatives M_s^l at x_sc^+.
    pub shock_x: f64,
    pub shock_m: Vec<f64>,
}

impl SpatialIndicator {
    /// Largest |M^l| over all rows, per order.
    pub fn max_abs_m(&self) -> Vec<f64> {
        self.fold_rows(|row| &row.m)
    }

    /// Largest finite |D^l| over all rows, per order.
    pub fn max_abs_d(&self) -> Vec<f64> {
        self.fold_rows(|row| &row.d)
    }

    fn fold_rows(&self, f: impl Fn(&IndicatorRow) -> &[f64]) -> Vec<f64> {
        let orders = self.rows.first().map_or(0, |r| r.m.len());
        let mut out = vec![0.0; orders];
        for row in &self.rows {
            for (o, &v) in out.iter_mut().zip(f(row)) {
                if v.is_finite() {
                    *o = f64::max(*o, v.abs());
                }
            }
        }
        out
    }

    fn row_by_boundary(&self, j: usize) -> Option<&IndicatorRow> {
        self.rows
            .binary_search_by_key(&j, |r| r.boundary)
            .ok()
            .map(|k| &self.rows[k])
    }
}

/// One-sided derivative jumps at every reported boundary of a state.
pub fn spatial_indicator(
    disc: &Discretization,
    state: &ShockState,
    step: usize,
) -> Result<SpatialIndicator> {
    let mesh = &state.mesh;
    let p = state.degree();
    let alpha = 1.0 / p as f64;
    let h = mesh.h();
    let i = mesh.shock_index();
    let m_cells = mesh.background_cells();

    let mut rows = Vec::with_capacity(m_cells - 1);
    let boundaries = (0..i).chain(i + 2..m_cells);
    for j in boundaries {
        let x = mesh.boundary(j);
        let m_slot = if j <= i - 1 { j } else { j - 1 };
        let mut m_vals = Vec::with_capacity(p + 1);
        for l in 0..=p {
            m_vals.push(state.cells[m_slot].eval(x, l)?);
        }
        let mut l_vals = vec![f64::NAN; p + 1];
        if j == 0 {
            l_vals[0] = disc.inflow().value(state.time);
        } else {
            for (l, slot_val) in l_vals.iter_mut().enumerate() {
                *slot_val = state.cells[m_slot - 1].eval(x, l)?;
            }
        }
        let jump: Vec<f64> = m_vals.iter().zip(&l_vals).map(|(m, l)| m - l).collect();
        let d: Vec<f64> = jump
            .iter()
            .enumerate()
            .map(|(l, &jv)| jv / h.powf(p as f64 + 2.0 - l as f64 * (1.0 + alpha)))
            .collect();
        rows.push(IndicatorRow {
            boundary: j,
            x,
            m: m_vals,
            l: l_vals,
            jump,
            d,
        });
    }

    let mut shock_m = Vec::with_capacity(p + 1);
    for l in 0..=p {
        shock_m.push(state.cells[mesh.right_slot()].eval(mesh.x_shock(), l)?);
    }
    Ok(SpatialIndicator {
        step,
        time: state.time,
        alpha,
        rows,
        shock_x: mesh.x_shock(),
        shock_m,
    })
}

/// Observed orders log_h |J^l| per boundary and derivative order.
///
/// `None` marks an exactly zero jump (order is +infinity, left empty in
/// reports) or a jump that is not defined at that boundary. Requires
/// h in (0, 1): log base h with h < 1 keeps orders positive.
pub fn jump_orders(ind: &SpatialIndicator, h: f64) -> Result<Vec<Vec<Option<f64>>>> {
    if !(h > 0.0 && h < 1.0) {
        return Err(Error::Argument(format!(
            "jump orders need a mesh width in (0, 1), got {h}"
        )));
    }
    let ln_h = h.ln();
    Ok(ind.rows
        .iter()
        .map(|row| {
            row.jump
                .iter()
                .map(|&j| {
                    if !j.is_finite() || j == 0.0 {
                        None
                    } else {
                        Some(j.abs().ln() / ln_h)
                    }
                })
                .collect()
        })
        .collect())
}

/// Temporal smoothness report: magnitudes of the time derivatives.
#[derive(Debug, Clone)]
pub struct TemporalIndicator {
    pub step: usize,
    pub time: f64,
    pub orders: usize,
    /// |d^l x_sc / dt^l| for l = 0..=orders.
    pub shock: Vec<f64>,
    /// max over cells of the sampled sup-norm of the l-th Eulerian derivative.
    pub max_norm: Vec<f64>,
}

/// Sampled sup-norm of a polynomial (13 equispaced points, endpoints included).
fn sampled_sup(poly: &ModalPoly) -> f64 {
    let (lo, hi) = poly.interval();
    let mut m = 0.0f64;
    for k in 0..13 {
        let x = lo + (hi - lo) * k as f64 / 12.0;
        m = m.max(poly.eval_unchecked(x, 0).abs());
    }
    m
}

pub fn temporal_indicator(
    disc: &Discretization,
    state: &ShockState,
    step: usize,
    orders: usize,
) -> Result<TemporalIndicator> {
    let td = disc.temporal_derivatives(state, state.time, orders)?;
    let shock = td.shock.iter().map(|s| s.abs()).collect();
    let max_norm = td
        .cells
        .iter()
        .map(|polys| polys.iter().map(sampled_sup).fold(0.0, f64::max))
        .collect();
    Ok(TemporalIndicator {
        step,
        time: state.time,
        orders,
        shock,
        max_norm,
    })
}

/// Thresholds for the anti-smoothing detector.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectorConfig {
    /// Required per-step growth factor of |D^l|.
    pub growth: f64,
    /// Number of consecutive reports retained for comparison.
    pub window: usize,
    /// Number of consecutive alternating-growth comparisons that trigger.
    pub persistence: usize,
    /// Magnitudes below this are treated as noise and never flag.
    pub floor: f64,
    /// Boundaries within this many cells of the special pair are not
    /// scanned. The jumps there carry shock structure, swing as the
    /// shock approaches a boundary, and change identity at every
    /// transition, so they mimic alternating growth during perfectly
    /// stable runs.
    pub shock_buffer: usize,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            growth: 2.0,
            window: 3,
            persistence: 2,
            floor: 1e-4,
            shock_buffer: 2,
        }
    }
}

impl DetectorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.growth <= 1.0 || self.persistence == 0 || self.window < self.persistence + 1 {
            return Err(Error::Config(format!(
                "detector thresholds invalid: growth {} (> 1 required), window {} >= persistence {} + 1",
                self.growth, self.window, self.persistence
            )));
        }
        if !(self.floor >= 0.0) {
            return Err(Error::Config("detector floor must be >= 0".into()));
        }
        Ok(())
    }
}

/// One (boundary, order) pair whose scaled jumps alternate and grow.
#[derive(Debug, Clone)]
pub struct DetectionHit {
    pub boundary: usize,
    pub order: usize,
    /// The offending D^l values, oldest first.
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Default)]
pub struct DetectionReport {
    pub flagged: bool,
    pub hits: Vec<DetectionHit>,
}

/// Boundary indices of the special pair's reported ends, found from the
/// gap the hidden interior leaves in the row enumeration.
fn pair_ends(ind: &SpatialIndicator) -> Option<(usize, usize)> {
    ind.rows
        .windows(2)
        .find(|w| w[1].boundary > w[0].boundary + 1)
        .map(|w| (w[0].boundary, w[1].boundary))
}

/// Scan the most recent reports for sign-alternating growth of D^l.
///
/// A (boundary, order) pair is flagged when the last `persistence`
/// consecutive comparisons each show |D| growing by at least `growth`
/// with opposite signs, all magnitudes above `floor`. Boundaries within
/// `shock_buffer` cells of the special pair in any report of the window
/// are skipped. With fewer than persistence + 1 reports nothing can be
/// flagged.
pub fn detect_anti_smoothing(
    history: &[SpatialIndicator],
    cfg: &DetectorConfig,
) -> DetectionReport {
    let need = cfg.persistence + 1;
    if history.len() < need {
        return DetectionReport::default();
    }
    let window = &history[history.len() - need..];
    let last = window.last().unwrap();
    let orders = last.rows.first().map_or(0, |r| r.d.len());

    let excluded: Vec<(usize, usize)> = window
        .iter()
        .filter_map(pair_ends)
        .map(|(lo, hi)| (lo.saturating_sub(cfg.shock_buffer), hi + cfg.shock_buffer))
        .collect();

    let mut hits = Vec::new();
    for row in &last.rows {
        if excluded.iter().any(|&(lo, hi)| row.boundary >= lo && row.boundary <= hi) {
            continue;
        }
        'order: for l in 0..orders {
            let mut values = Vec::with_capacity(need);
            for ind in window.iter() {
                match ind.row_by_boundary(row.boundary) {
                    Some(r) if r.d[l].is_finite() => values.push(r.d[l]),
                    _ => continue 'order,
                }
            }
            let alternating_growth = values.windows(2).all(|w| {
                let (prev, next) = (w[0], w[1]);
                prev.abs() >= cfg.floor
                    && next.abs() >= cfg.floor
                    && next.abs() >= cfg.growth * prev.abs()
                    && prev.signum() == -next.signum()
            });
            if alternating_growth {
                hits.push(DetectionHit {
                    boundary: row.boundary,
                    order: l,
                    values,
                });
            }
        }
    }
    DetectionReport {
        flagged: !hits.is_empty(),
        hits,
    }
}

/// Shock height u(x_sc^-) - u(x_sc^+) and the 0.75 * height reference level.
pub fn shock_height(state: &ShockState) -> (f64, f64) {
    let height = state.left_shock_trace() - state.right_shock_trace();
    (height, 0.75 * height)
}

/// A-priori bound on the L1 error of the transition merge.
///
/// `right` is the outgoing Omega_R piece and `neighbor` the background
/// cell it merges with; they abut at x0. Averaging the one-sided
/// derivatives at x0 defines a single polynomial v whose distance to
/// the two pieces is the jump polynomial
///
///   d(y) = sum_l (M^l - L^l) / (2 l!) y^l,   y = x - x0,
///
/// with opposite signs on the two sides, so ||v - u||_L2(union) is
/// computable in closed form. Returns (c_hat, bound) where
/// c_hat = ||v - u||_L2 / h^(p + 3/2) and the measured L1 merge error
/// obeys measured <= bound = sqrt(2) * c_hat * h^(p+2): the projection
/// is L2-optimal, v is in the projection space, and |union| <= 2h turns
/// the L2 bound into L1.
pub fn transition_error_bound(
    right: &ModalPoly,
    neighbor: &ModalPoly,
    h: f64,
    p: usize,
) -> Result<(f64, f64)> {
    let x0 = right.interval().1;
    if (neighbor.interval().0 - x0).abs() > 1e-9 * h {
        return Err(Error::Argument("pieces do not abut at the merge point".into()));
    }
    let mut jump_taylor = Vec::with_capacity(p + 1);
    let mut fact = 1.0;
    for l in 0..=p {
        if l > 0 {
            fact *= l as f64;
        }
        let m = neighbor.eval(x0, l)?;
        let lv = right.eval(x0, l)?;
        jump_taylor.push((m - lv) / (2.0 * fact));
    }

    // Integrate d(y)^2 over [right.lo - x0, 0] and [0, neighbor.hi - x0].
    let rule = gauss_rule(p + 1)?;
    let mut norm_sq = 0.0;
    for (a, b) in [(right.interval().0 - x0, 0.0), (0.0, neighbor.interval().1 - x0)] {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        norm_sq += half
            * rule.integrate(|xi| {
                let y = mid + half * xi;
                crate::poly::eval(&jump_taylor, y).powi(2)
            });
    }
    let c_hat = norm_sq.max(0.0).sqrt() / h.powf(p as f64 + 1.5);
    let bound = std::f64::consts::SQRT_2 * c_hat * h.powi(p as i32 + 2);
    Ok((c_hat, bound))
}
