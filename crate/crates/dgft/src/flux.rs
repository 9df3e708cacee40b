//! Scalar flux model restricted to west-wind transport.
//!
//! The solver treats fluxes with f'(u) > 0 everywhere on an admissible
//! interval [lo, hi] that encloses the data. Under that sign condition
//! the Godunov interface flux degenerates to pure upwinding, so every
//! numerical flux is f evaluated at the trace from the left, and the
//! inflow boundary x = a is the only place where exterior data enters.
//!
//! Fluxes are polynomials in u, with Burgers' f(u) = u^2/2 as the
//! stock choice. Keeping f polynomial makes f', f'', f''' exact and
//! lets the wave-speed bound be computed from the critical points of
//! f' instead of by sampling.

use crate::error::{Error, Result};
use crate::poly;

const MAX_DERIV: usize = 3;

/// Polynomial flux together with its admissible interval.
#[derive(Debug, Clone)]
pub struct FluxModel {
    /// Monomial coefficients of f, f', f'', f''' (ascending powers).
    derivs: [Vec<f64>; MAX_DERIV + 1],
    lo: f64,
    hi: f64,
}

impl FluxModel {
    /// Burgers' flux f(u) = u^2 / 2 on the admissible interval `[lo, hi]`.
    pub fn burgers(lo: f64, hi: f64) -> Result<Self> {
        Self::polynomial(&[0.0, 0.0, 0.5], lo, hi)
    }

    /// Flux with the given ascending monomial coefficients on `[lo, hi]`.
    ///
    /// Fails unless f'(u) > 0 holds on all of `[lo, hi]`; the minimum of
    /// f' is found exactly from the interval endpoints and the real
    /// roots of f'' inside the interval.
    pub fn polynomial(coeffs: &[f64], lo: f64, hi: f64) -> Result<Self> {
        if coeffs.is_empty() || coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::Argument("flux coefficients must be finite".into()));
        }
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::Argument(format!(
                "admissible interval [{lo}, {hi}] is not a proper interval"
            )));
        }
        let d1 = poly::differentiate(coeffs);
        let d2 = poly::differentiate(&d1);
        let d3 = poly::differentiate(&d2);

        let mut candidates = vec![lo, hi];
        candidates.extend(poly::real_roots_in(&d2, lo, hi));
        let (mut worst_at, mut worst) = (lo, f64::INFINITY);
        for &u in &candidates {
            let s = poly::eval(&d1, u);
            if s < worst {
                worst = s;
                worst_at = u;
            }
        }
        if worst <= 0.0 {
            return Err(Error::NotWestWind {
                lo,
                hi,
                at: worst_at,
                slope: worst,
            });
        }
        Ok(Self {
            derivs: [coeffs.to_vec(), d1, d2, d3],
            lo,
            hi,
        })
    }

    /// Admissible interval `(lo, hi)`.
    pub fn admissible(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    /// Whether `u` lies inside the admissible interval (endpoints included).
    pub fn contains(&self, u: f64) -> bool {
        u >= self.lo && u <= self.hi
    }

    /// f and its derivatives: `eval(u, 0)` = f(u), `eval(u, 1)` = f'(u), up to order 3.
    pub fn eval(&self, u: f64, order: usize) -> Result<f64> {
        if order > MAX_DERIV {
            return Err(Error::UnsupportedOrder(order));
        }
        if !self.contains(u) {
            return Err(Error::OutOfRange {
                value: u,
                lo: self.lo,
                hi: self.hi,
            });
        }
        Ok(poly::eval(&self.derivs[order], u))
    }

    /// Upwind interface flux: f evaluated at the trace from the left.
    pub fn upwind(&self, u_left: f64) -> Result<f64> {
        self.eval(u_left, 0)
    }

    /// Largest |f'| over the admissible interval intersected with `[-bound, bound]`.
    ///
    /// Exact: the maximum is attained at an endpoint of the clipped
    /// interval or at a root of f'' inside it.
    pub fn max_wave_speed(&self, bound: f64) -> Result<f64> {
        if !(bound.is_finite() && bound >= 0.0) {
            return Err(Error::Argument(format!("wave-speed bound {bound} invalid")));
        }
        let lo = self.lo.max(-bound);
        let hi = self.hi.min(bound);
        if lo > hi {
            return Err(Error::Argument(format!(
                "interval [{}, {}] does not meet [-{bound}, {bound}]",
                self.lo, self.hi
            )));
        }
        let mut candidates = vec![lo, hi];
        candidates.extend(poly::real_roots_in(&self.derivs[2], lo, hi));
        Ok(candidates
            .iter()
            .map(|&u| poly::eval(&self.derivs[1], u).abs())
            .fold(0.0, f64::max))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn burgers() -> FluxModel {
        FluxModel::burgers(0.39, 1.71).unwrap()
    }

    #[test]
    fn burgers_values() {
        let f = burgers();
        // f(1.2) = 1.44/2 = 0.72, f'(0.8) = 0.8, f'' = 1, f''' = 0
        assert!((f.eval(1.2, 0).unwrap() - 0.72).abs() < 1e-15);
        assert!((f.eval(0.8, 1).unwrap() - 0.8).abs() < 1e-15);
        assert!((f.eval(1.0, 2).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(f.eval(1.0, 3).unwrap(), 0.0);
    }

    #[test]
    fn rejects_order_four_and_out_of_range() {
        let f = burgers();
        assert!(matches!(f.eval(1.0, 4), Err(Error::UnsupportedOrder(4))));
        assert!(matches!(f.eval(2.0, 0), Err(Error::OutOfRange { .. })));
        assert!(matches!(f.eval(0.1, 1), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn upwind_is_left_flux() {
        let f = burgers();
        assert_eq!(f.upwind(1.2).unwrap(), f.eval(1.2, 0).unwrap());
    }

    #[test]
    fn west_wind_validation() {
        // f' = u vanishes at 0, so any interval reaching 0 is rejected.
        assert!(matches!(
            FluxModel::burgers(-0.5, 1.0),
            Err(Error::NotWestWind { .. })
        ));
        assert!(FluxModel::burgers(0.01, 1.0).is_ok());
        // f = u^3/3 has f' = u^2 >= 0 with equality at 0.
        assert!(matches!(
            FluxModel::polynomial(&[0.0, 0.0, 0.0, 1.0 / 3.0], -1.0, 1.0),
            Err(Error::NotWestWind { .. })
        ));
        assert!(FluxModel::polynomial(&[0.0, 0.0, 0.0, 1.0 / 3.0], 0.5, 2.0).is_ok());
    }

    #[test]
    fn wave_speed_clips_to_bound() {
        let f = burgers();
        // f' = u, max over [0.39, 1.6] is 1.6
        assert!((f.max_wave_speed(1.6).unwrap() - 1.6).abs() < 1e-15);
        // unclipped: 1.71
        assert!((f.max_wave_speed(10.0).unwrap() - 1.71).abs() < 1e-15);
    }

    #[test]
    fn wave_speed_interior_maximum() {
        // f = 2u - (u-1)^3/3 has f' = 2 - (u-1)^2, maximal at u = 1.
        // Expanded: f = -1/3 + 3u^2/... work in (u-1) directly:
        // f(u) = 2u - (u^3 - 3u^2 + 3u - 1)/3 = 1/3 + u + u^2 - u^3/3.
        let f = FluxModel::polynomial(&[1.0 / 3.0, 1.0, 1.0, -1.0 / 3.0], 0.5, 1.5).unwrap();
        assert!((f.max_wave_speed(10.0).unwrap() - 2.0).abs() < 1e-13);
    }

    #[test]
    fn empty_intersection_is_an_error() {
        let f = burgers();
        assert!(f.max_wave_speed(0.2).is_err());
    }
}
