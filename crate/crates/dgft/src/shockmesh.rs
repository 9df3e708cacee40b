//! Shock-fitted mesh: a uniform background partition with two special
//! cells straddling the tracked discontinuity.
//!
//! The background grid has m cells of width h = (b - a)/m with
//! boundaries x_j = a + j h, j = 0..=m. If the shock sits at x_sc in
//! the half-open cell [x_i, x_{i+1}), the three background cells
//! i-1, i, i+1 are replaced by
//!
//!   Omega_L = (x_{i-1}, x_sc)   and   Omega_R = (x_sc, x_{i+2}),
//!
//! so the state carries m - 1 cell polynomials. For an accepted state
//! h <= |Omega_L| < 2h and h < |Omega_R| <= 2h: neither special cell
//! degenerates, whatever the shock position inside its cell. Cells are
//! addressed by a left-to-right slot index; slots i-1 and i are the
//! special pair, slot s >= i+1 holds background cell s+1.
//!
//! When a step carries the shock past x_{i+1}, the layout is rebuilt
//! once, after the full step: the old Omega_L polynomial is re-expanded
//! exactly onto background cell i-1 and the new Omega_L, and the old
//! Omega_R remainder is L2-projected together with background cell i+2
//! onto the new Omega_R. Only that merged projection loses information;
//! its error is measured and bounded per event.

use crate::error::{Error, Result};
use crate::polykernel::{project_merged, reexpand};
use crate::semidiscrete::ShockState;
use crate::smoothness::transition_error_bound;

#[derive(Debug, Clone)]
pub struct ShockMesh {
    a: f64,
    b: f64,
    m: usize,
    h: f64,
    shock_index: usize,
    x_shock: f64,
}

impl ShockMesh {
    /// Mesh for domain `(a, b)` with `m` background cells and the shock at `x_shock`.
    ///
    /// The shock cell index i must satisfy 2 <= i <= m - 3 so that both
    /// special cells and their regular neighbours exist.
    pub fn new(a: f64, b: f64, m: usize, x_shock: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::Config(format!("domain ({a}, {b}) is empty")));
        }
        if m < 6 {
            return Err(Error::Config(format!(
                "need at least 6 background cells, got {m}"
            )));
        }
        if !(x_shock > a && x_shock < b) {
            return Err(Error::Config(format!(
                "shock position {x_shock} outside ({a}, {b})"
            )));
        }
        let h = (b - a) / m as f64;
        let shock_index = (((x_shock - a) / h).floor() as usize).min(m - 1);
        if shock_index < 2 || shock_index > m - 3 {
            return Err(Error::Config(format!(
                "shock cell index {shock_index} outside 2..={} (shock too close to a domain end)",
                m - 3
            )));
        }
        Ok(Self {
            a,
            b,
            m,
            h,
            shock_index,
            x_shock,
        })
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    pub fn background_cells(&self) -> usize {
        self.m
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn shock_index(&self) -> usize {
        self.shock_index
    }

    pub fn x_shock(&self) -> f64 {
        self.x_shock
    }

    /// Background grid point x_j = a + j h, for j = 0..=m.
    pub fn boundary(&self, j: usize) -> f64 {
        if j == self.m {
            self.b
        } else {
            self.a + j as f64 * self.h
        }
    }

    /// Number of cell polynomials carried by a state on this mesh.
    pub fn cell_count(&self) -> usize {
        self.m - 1
    }

    /// Slot of Omega_L.
    pub fn left_slot(&self) -> usize {
        self.shock_index - 1
    }

    /// Slot of Omega_R.
    pub fn right_slot(&self) -> usize {
        self.shock_index
    }

    /// Interval covered by a slot.
    pub fn interval(&self, slot: usize) -> (f64, f64) {
        let i = self.shock_index;
        if slot == i - 1 {
            (self.boundary(i - 1), self.x_shock)
        } else if slot == i {
            (self.x_shock, self.boundary(i + 2))
        } else if slot < i - 1 {
            (self.boundary(slot), self.boundary(slot + 1))
        } else {
            (self.boundary(slot + 1), self.boundary(slot + 2))
        }
    }

    /// Same layout with the shock moved inside its current cell's reach.
    ///
    /// Positions up to half a cell beyond the shock cell are representable
    /// (Runge-Kutta stages and freshly finished steps); anything further
    /// would make a special cell degenerate.
    pub fn with_shock_at(&self, x: f64) -> Result<Self> {
        let i = self.shock_index;
        if !(x > self.boundary(i - 1) && x < self.boundary(i + 2)) {
            return Err(Error::Argument(format!(
                "shock position {x} not representable with shock cell {i}"
            )));
        }
        let mut out = self.clone();
        out.x_shock = x;
        Ok(out)
    }

    /// True once the shock has reached or passed the right end of its cell.
    pub fn needs_transition(&self) -> bool {
        self.x_shock >= self.boundary(self.shock_index + 1)
    }

    /// Width invariants of an accepted (post-transition) state.
    pub fn widths_valid(&self) -> bool {
        let i = self.shock_index;
        let wl = self.x_shock - self.boundary(i - 1);
        let wr = self.boundary(i + 2) - self.x_shock;
        wl >= self.h && wl < 2.0 * self.h && wr > self.h && wr <= 2.0 * self.h
    }
}

/// Record of one cell-layout rebuild.
#[derive(Debug, Clone)]
pub struct TransitionEvent {
    pub step: usize,
    pub time: f64,
    pub old_index: usize,
    pub new_index: usize,
    /// L1 distance between the merged Omega_R polynomial and the two pieces.
    pub measured_l1: f64,
    /// Scale-free constant from the one-sided derivatives at the merge point.
    pub c_hat: f64,
    /// A-priori bound sqrt(2) * c_hat * h^(p+2) on the measured error.
    pub bound: f64,
}

/// Rebuild the cell layout after the shock has crossed x_{i+1}.
///
/// The old Omega_L splits exactly; the old Omega_R remainder and
/// background cell i+2 merge by L2 projection. Total mass is conserved
/// and the projection error of the merge is measured exactly and
/// recorded alongside its bound.
pub fn apply_transition(state: &ShockState, step: usize) -> Result<(ShockState, TransitionEvent)> {
    let mesh = &state.mesh;
    let i = mesh.shock_index();
    let x = mesh.x_shock();
    if !mesh.needs_transition() {
        return Err(Error::Argument(format!(
            "no transition pending at x_sc = {x}"
        )));
    }
    if x >= mesh.boundary(i + 2) {
        return Err(Error::FatalStep {
            step,
            detail: format!(
                "shock at {x} beyond x_(i+2) = {}; time step too large",
                mesh.boundary(i + 2)
            ),
        });
    }
    if i + 1 > mesh.background_cells() - 3 {
        return Err(Error::ShockReachedOutflow { step });
    }

    let p = state.degree();
    let h = mesh.h();
    let old_left = &state.cells[mesh.left_slot()];
    let old_right = &state.cells[mesh.right_slot()];
    let neighbor = &state.cells[mesh.right_slot() + 1];

    // Error bound from the one-sided derivatives of the two pieces at
    // their common point x_{i+2}, evaluated before anything is merged.
    let (c_hat, bound) = transition_error_bound(old_right, neighbor, h, p)?;

    // 1. Split the old Omega_L = (x_{i-1}, x) at x_i. Exact.
    let split_regular = reexpand(old_left, mesh.boundary(i - 1), mesh.boundary(i))?;
    let new_left = reexpand(old_left, mesh.boundary(i), x)?;

    // 2. Merge the old Omega_R remainder (x, x_{i+2}) with cell i+2.
    let merged = project_merged(old_right, neighbor)?;

    // 3. Measure the projection error exactly: reexpand the merged
    // polynomial onto each piece and integrate the absolute difference.
    let mut measured = 0.0;
    for piece in [old_right, neighbor] {
        let (lo, hi) = piece.interval();
        let mut diff = reexpand(&merged, lo, hi)?;
        for (d, c) in diff.coeffs_mut().iter_mut().zip(piece.coeffs()) {
            *d -= c;
        }
        measured += diff.integrate_abs();
    }

    let new_mesh = ShockMesh {
        shock_index: i + 1,
        ..mesh.clone()
    };
    let mut cells = Vec::with_capacity(state.cells.len());
    cells.extend(state.cells[..mesh.left_slot()].iter().cloned());
    cells.push(split_regular);
    cells.push(new_left);
    cells.push(merged);
    cells.extend(state.cells[mesh.right_slot() + 2..].iter().cloned());
    debug_assert_eq!(cells.len(), new_mesh.cell_count());
    debug_assert!(new_mesh.widths_valid());

    let new_state = ShockState {
        mesh: new_mesh,
        cells,
        time: state.time,
    };
    let event = TransitionEvent {
        step,
        time: state.time,
        old_index: i,
        new_index: i + 1,
        measured_l1: measured,
        c_hat,
        bound,
    };
    Ok((new_state, event))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polykernel::ModalPoly;

    #[test]
    fn initial_layout_matches_hand_computation() {
        // Domain (0, 10), m = 20, shock at 3.18: h = 0.5, i = 6,
        // Omega_L = (2.5, 3.18), Omega_R = (3.18, 4.0).
        let mesh = ShockMesh::new(0.0, 10.0, 20, 3.18).unwrap();
        assert_eq!(mesh.shock_index(), 6);
        assert_eq!(mesh.cell_count(), 19);
        let (llo, lhi) = mesh.interval(5);
        assert!((llo - 2.5).abs() < 1e-15 && (lhi - 3.18).abs() < 1e-15);
        let (rlo, rhi) = mesh.interval(6);
        assert!((rlo - 3.18).abs() < 1e-15 && (rhi - 4.0).abs() < 1e-15);
        assert!(mesh.widths_valid());
        // Slot 7 holds background cell 8 = (4.0, 4.5).
        let (lo, hi) = mesh.interval(7);
        assert!((lo - 4.0).abs() < 1e-15 && (hi - 4.5).abs() < 1e-15);
        // Slot 4 holds background cell 4 = (2.0, 2.5).
        let (lo, hi) = mesh.interval(4);
        assert!((lo - 2.0).abs() < 1e-15 && (hi - 2.5).abs() < 1e-15);
    }

    #[test]
    fn shock_too_close_to_boundary_is_rejected() {
        assert!(ShockMesh::new(0.0, 1.0, 10, 0.05).is_err()); // i = 0
        assert!(ShockMesh::new(0.0, 1.0, 10, 0.95).is_err()); // i = 9 > m-3
        let mesh = ShockMesh::new(0.0, 1.0, 10, 0.55).unwrap();
        assert_eq!(mesh.shock_index(), 5);
        let (lo, hi) = mesh.interval(4);
        assert!((lo - 0.4).abs() < 1e-15 && (hi - 0.55).abs() < 1e-15);
    }

    #[test]
    fn transition_trigger() {
        let mesh = ShockMesh::new(0.0, 10.0, 20, 3.18).unwrap();
        assert!(!mesh.with_shock_at(3.2).unwrap().needs_transition());
        assert!(mesh.with_shock_at(3.5).unwrap().needs_transition());
        assert!(mesh.with_shock_at(3.9).unwrap().needs_transition());
        // Beyond x_{i+2} the layout cannot represent the state at all.
        assert!(mesh.with_shock_at(4.1).is_err());
    }

    fn state_on(mesh: &ShockMesh, degree: usize, f: impl Fn(usize, usize) -> f64) -> ShockState {
        let cells = (0..mesh.cell_count())
            .map(|s| {
                let (lo, hi) = mesh.interval(s);
                let coeffs = (0..=degree).map(|k| f(s, k)).collect();
                ModalPoly::new(lo, hi, coeffs).unwrap()
            })
            .collect();
        ShockState {
            mesh: mesh.clone(),
            cells,
            time: 0.0,
        }
    }

    #[test]
    fn transition_conserves_mass_and_splits_exactly() {
        let mesh = ShockMesh::new(0.0, 10.0, 20, 3.18)
            .unwrap()
            .with_shock_at(3.62)
            .unwrap();
        let state = state_on(&mesh, 3, |s, k| {
            1.0 + 0.1 * s as f64 * 0.5f64.powi(k as i32) - 0.02 * k as f64
        });
        let mass_before: f64 = state.cells.iter().map(|c| c.mass()).sum();
        let (after, event) = apply_transition(&state, 7).unwrap();
        assert_eq!(event.old_index, 6);
        assert_eq!(event.new_index, 7);
        assert_eq!(after.mesh.shock_index(), 7);
        assert!(after.mesh.widths_valid());
        assert_eq!(after.cells.len(), after.mesh.cell_count());

        let mass_after: f64 = after.cells.iter().map(|c| c.mass()).sum();
        assert!((mass_after - mass_before).abs() <= 1e-11 * mass_before.abs());

        // The split of the old Omega_L is exact: probe both fragments.
        let old_left = &state.cells[5];
        for (slot, points) in [(5usize, [2.55, 2.75, 2.95]), (6usize, [3.05, 3.3, 3.61])] {
            for x in points {
                let a = old_left.eval_unchecked(x, 0);
                let b = after.cells[slot].eval(x, 0).unwrap();
                assert!((a - b).abs() < 1e-11, "at {x}: {a} vs {b}");
            }
        }

        // Merged side: error was measured and sits below its bound.
        assert!(event.measured_l1 >= 0.0);
        assert!(event.measured_l1 <= event.bound * (1.0 + 1e-12));

        // Cells away from the shock are untouched.
        for slot in [0usize, 2, 10, 18] {
            assert_eq!(state.cells[slot].coeffs(), after.cells[slot].coeffs());
        }
    }

    #[test]
    fn transition_with_global_polynomial_is_lossless() {
        // If the whole neighbourhood already agrees with one cubic, the
        // merge reproduces it and the measured error is roundoff.
        let mesh = ShockMesh::new(0.0, 10.0, 20, 3.18)
            .unwrap()
            .with_shock_at(3.55)
            .unwrap();
        let global = ModalPoly::new(0.0, 10.0, vec![1.0, 0.5, -0.2, 0.04]).unwrap();
        let cells = (0..mesh.cell_count())
            .map(|s| {
                let (lo, hi) = mesh.interval(s);
                reexpand(&global, lo, hi).unwrap()
            })
            .collect();
        let state = ShockState {
            mesh: mesh.clone(),
            cells,
            time: 0.0,
        };
        let (_, event) = apply_transition(&state, 1).unwrap();
        assert!(event.measured_l1 < 1e-11);
        assert!(event.c_hat < 1e-9);
    }

    #[test]
    fn transition_into_outflow_region_is_clean() {
        // m = 8: valid i range is 2..=5; with i = 5 a transition would
        // need i = 6 and must signal the outflow condition instead.
        let mesh = ShockMesh::new(0.0, 8.0, 8, 5.5)
            .unwrap()
            .with_shock_at(6.1)
            .unwrap();
        assert_eq!(mesh.shock_index(), 5);
        let state = state_on(&mesh, 3, |_, k| if k == 0 { 1.0 } else { 0.01 });
        match apply_transition(&state, 42) {
            Err(Error::ShockReachedOutflow { step: 42 }) => {}
            other => panic!("expected outflow signal, got {other:?}"),
        }
    }
}
