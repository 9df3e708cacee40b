//! Legendre modal basis, Gauss-Legendre quadrature, and L2 projection
//! on arbitrary intervals.
//!
//! A `ModalPoly` stores a polynomial on an interval (lo, hi) as
//! coefficients of Legendre polynomials in the reference coordinate
//! xi = 2(x - lo)/(hi - lo) - 1, so that the mass matrix is diagonal:
//! (P_k, P_k) over the cell equals (hi - lo)/(2k + 1). Everything the
//! solver does with cell polynomials (evaluation with derivatives,
//! exact re-expansion onto subintervals, merged projection of two
//! abutting pieces, norms) lives here and is independent of the PDE.

use crate::error::{Error, Result};
use crate::poly;

/// Evaluate the Legendre polynomial P_l or one of its xi-derivatives.
///
/// Uses the three-term recurrence (l+1) P_{l+1} = (2l+1) xi P_l - l P_{l-1}
/// differentiated `deriv` times; valid for any real xi, including
/// |xi| > 1 (needed when a polynomial is re-expanded past its original
/// support).
pub fn legendre_eval(l: usize, xi: f64, deriv: usize) -> f64 {
    legendre_table(l, xi, deriv)[l][deriv]
}

/// Values `out[k][d]` = d-th xi-derivative of P_k at xi, for k <= l, d <= deriv.
fn legendre_table(l: usize, xi: f64, deriv: usize) -> Vec<Vec<f64>> {
    let mut out = vec![vec![0.0; deriv + 1]; l + 1];
    out[0][0] = 1.0;
    if l == 0 {
        return out;
    }
    out[1][0] = xi;
    if deriv >= 1 {
        out[1][1] = 1.0;
    }
    for k in 1..l {
        for d in 0..=deriv {
            let lower = if d > 0 { out[k][d - 1] } else { 0.0 };
            let term = (2 * k + 1) as f64 * (xi * out[k][d] + d as f64 * lower);
            out[k + 1][d] = (term - k as f64 * out[k - 1][d]) / (k + 1) as f64;
        }
    }
    out
}

/// Gauss-Legendre quadrature rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Apply the rule to a function of xi.
    pub fn integrate(&self, mut g: impl FnMut(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * g(x))
            .sum()
    }
}

/// Gauss-Legendre rule with `q` nodes, exact for polynomials of degree 2q - 1.
///
/// Nodes are the roots of P_q found by Newton iteration from the
/// Chebyshev initial guess; weights are 2 / ((1 - x^2) P_q'(x)^2).
pub fn gauss_rule(q: usize) -> Result<QuadratureRule> {
    if q == 0 || q > 32 {
        return Err(Error::Argument(format!(
            "quadrature node count {q} outside 1..=32"
        )));
    }
    let mut nodes = vec![0.0; q];
    let mut weights = vec![0.0; q];
    for i in 0..(q + 1) / 2 {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (q as f64 + 0.5)).cos();
        for _ in 0..100 {
            let t = legendre_table(q, x, 1);
            let dx = t[q][0] / t[q][1];
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let t = legendre_table(q, x, 1);
        let dp = t[q][1];
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // Newton converges from above in |x|; mirror for exact symmetry.
        nodes[i] = -x.abs();
        nodes[q - 1 - i] = x.abs();
        weights[i] = w;
        weights[q - 1 - i] = w;
    }
    if q % 2 == 1 {
        nodes[q / 2] = 0.0;
    }
    Ok(QuadratureRule { nodes, weights })
}

/// Polynomial on an interval in the Legendre modal basis.
#[derive(Debug, Clone)]
pub struct ModalPoly {
    lo: f64,
    hi: f64,
    coeffs: Vec<f64>,
}

impl ModalPoly {
    pub fn new(lo: f64, hi: f64, coeffs: Vec<f64>) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::Argument(format!(
                "interval [{lo}, {hi}] is not a proper interval"
            )));
        }
        if coeffs.is_empty() {
            return Err(Error::Argument("modal coefficients must be nonempty".into()));
        }
        Ok(Self { lo, hi, coeffs })
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    /// Same coefficients reinterpreted on a new interval (no re-projection).
    pub fn with_interval(&self, lo: f64, hi: f64) -> Result<Self> {
        Self::new(lo, hi, self.coeffs.clone())
    }

    /// Reference coordinate of `x`.
    pub fn xi_of(&self, x: f64) -> f64 {
        2.0 * (x - self.lo) / (self.hi - self.lo) - 1.0
    }

    /// Value or x-derivative at `x`, which must lie in the closed interval.
    pub fn eval(&self, x: f64, deriv: usize) -> Result<f64> {
        let slack = 1e-12 * self.width().max(1.0);
        if x < self.lo - slack || x > self.hi + slack {
            return Err(Error::OutOfRange {
                value: x,
                lo: self.lo,
                hi: self.hi,
            });
        }
        Ok(self.eval_unchecked(x, deriv))
    }

    /// Evaluation without the domain check (the polynomial extends globally).
    pub(crate) fn eval_unchecked(&self, x: f64, deriv: usize) -> f64 {
        let xi = self.xi_of(x);
        let table = legendre_table(self.degree(), xi, deriv);
        let sum: f64 = self
            .coeffs
            .iter()
            .zip(&table)
            .map(|(&c, row)| c * row[deriv])
            .sum();
        sum * (2.0 / self.width()).powi(deriv as i32)
    }

    /// Cell mean (the 0-th modal coefficient).
    pub fn mean(&self) -> f64 {
        self.coeffs[0]
    }

    /// Integral over the interval.
    pub fn mass(&self) -> f64 {
        self.coeffs[0] * self.width()
    }

    /// L2 norm over the interval, from orthogonality of the basis.
    pub fn l2_norm(&self) -> f64 {
        let w = self.width();
        self.coeffs
            .iter()
            .enumerate()
            .map(|(k, &c)| c * c * w / (2 * k + 1) as f64)
            .sum::<f64>()
            .sqrt()
    }

    /// Integral of |u| over the interval, exact via root splitting.
    pub fn integrate_abs(&self) -> f64 {
        let mono = self.to_monomial_xi();
        let anti = poly::antiderivative(&mono);
        let mut breaks = vec![-1.0];
        breaks.extend(poly::real_roots_in(&mono, -1.0, 1.0));
        breaks.push(1.0);
        let mut total = 0.0;
        for w in breaks.windows(2) {
            if w[1] > w[0] {
                total += (poly::eval(&anti, w[1]) - poly::eval(&anti, w[0])).abs();
            }
        }
        total * self.width() / 2.0
    }

    /// Monomial coefficients in the reference coordinate xi.
    fn to_monomial_xi(&self) -> Vec<f64> {
        let p = self.degree();
        // Monomial expansions of P_0..P_p from the recurrence.
        let mut rows: Vec<Vec<f64>> = vec![vec![1.0]];
        if p >= 1 {
            rows.push(vec![0.0, 1.0]);
        }
        for k in 1..p {
            let mut next = vec![0.0; k + 2];
            for (j, &c) in rows[k].iter().enumerate() {
                next[j + 1] += (2 * k + 1) as f64 * c / (k + 1) as f64;
            }
            for (j, &c) in rows[k - 1].iter().enumerate() {
                next[j] -= k as f64 * c / (k + 1) as f64;
            }
            rows.push(next);
        }
        let mut mono = vec![0.0; p + 1];
        for (k, row) in rows.iter().enumerate() {
            for (j, &c) in row.iter().enumerate() {
                mono[j] += self.coeffs[k] * c;
            }
        }
        mono
    }
}

/// L2 projection of a function onto degree-`degree` polynomials on `(lo, hi)`.
///
/// Coefficients are c_k = (2k+1)/2 * sum_i w_i g(x(xi_i)) P_k(xi_i); the
/// rule must have at least degree+1 nodes, and a rule that is not exact
/// to degree 2*degree only yields an approximate projection (warned).
pub fn project_function(
    g: &mut dyn FnMut(f64) -> f64,
    lo: f64,
    hi: f64,
    degree: usize,
    rule: &QuadratureRule,
) -> Result<ModalPoly> {
    if rule.len() < degree + 1 {
        return Err(Error::Argument(format!(
            "rule with {} nodes cannot project onto degree {degree}",
            rule.len()
        )));
    }
    if 2 * rule.len() - 1 < 2 * degree {
        log::warn!(
            "projection rule exact only to degree {}, below 2p = {}",
            2 * rule.len() - 1,
            2 * degree
        );
    }
    let half = 0.5 * (hi - lo);
    let mid = 0.5 * (lo + hi);
    let mut coeffs = vec![0.0; degree + 1];
    for (&xi, &w) in rule.nodes().iter().zip(rule.weights()) {
        let v = g(mid + half * xi);
        let table = legendre_table(degree, xi, 0);
        for (k, c) in coeffs.iter_mut().enumerate() {
            *c += w * v * table[k][0];
        }
    }
    for (k, c) in coeffs.iter_mut().enumerate() {
        *c *= (2 * k + 1) as f64 / 2.0;
    }
    ModalPoly::new(lo, hi, coeffs)
}

/// Exact re-expansion of a polynomial onto another interval.
///
/// The new interval may extend beyond the original support; the
/// polynomial is evaluated as a global polynomial. Exact because a
/// (degree+1)-node Gauss rule integrates the degree-2p integrand of the
/// projection exactly.
pub fn reexpand(u: &ModalPoly, lo: f64, hi: f64) -> Result<ModalPoly> {
    let rule = gauss_rule(u.degree() + 1)?;
    project_function(&mut |x| u.eval_unchecked(x, 0), lo, hi, u.degree(), &rule)
}

/// L2 projection of two abutting polynomials onto their union interval.
///
/// Quadrature runs piecewise, so it is exact and the merged mean
/// conserves mass: c_0 * |union| = mass(left) + mass(right).
pub fn project_merged(left: &ModalPoly, right: &ModalPoly) -> Result<ModalPoly> {
    let gap = (left.interval().1 - right.interval().0).abs();
    if gap > 1e-9 * left.width().max(right.width()) {
        return Err(Error::Argument(format!(
            "pieces do not abut: left ends at {}, right starts at {}",
            left.interval().1,
            right.interval().0
        )));
    }
    if left.degree() != right.degree() {
        return Err(Error::Argument("pieces must share a degree".into()));
    }
    let degree = left.degree();
    let (lo, hi) = (left.interval().0, right.interval().1);
    let merged_width = hi - lo;
    let rule = gauss_rule(degree + 2)?;
    let mut coeffs = vec![0.0; degree + 1];
    for piece in [left, right] {
        let (plo, phi) = piece.interval();
        let half = 0.5 * (phi - plo);
        let mid = 0.5 * (plo + phi);
        for (&xi, &w) in rule.nodes().iter().zip(rule.weights()) {
            let x = mid + half * xi;
            let v = piece.eval_unchecked(x, 0);
            let xi_m = 2.0 * (x - lo) / merged_width - 1.0;
            let table = legendre_table(degree, xi_m, 0);
            for (k, c) in coeffs.iter_mut().enumerate() {
                *c += w * half * v * table[k][0];
            }
        }
    }
    for (k, c) in coeffs.iter_mut().enumerate() {
        *c *= (2 * k + 1) as f64 / merged_width;
    }
    ModalPoly::new(lo, hi, coeffs)
}
