//! Monomial polynomial helpers: Horner evaluation, coefficient
//! differentiation, and real-root isolation on an interval.
//!
//! Root isolation works recursively: the roots of the derivative split
//! the interval into monotone pieces, and a sign change on a monotone
//! piece is pinned down by bisection. This is exact to roundoff for the
//! low degrees (<= 10 or so) that appear here, and it is what makes the
//! wave-speed bound and the |polynomial| integrals exact instead of
//! sampled.

/// Evaluate a polynomial with ascending coefficients at `x`.
pub(crate) fn eval(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

/// Coefficients of the derivative polynomial.
pub(crate) fn differentiate(coeffs: &[f64]) -> Vec<f64> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, &c)| k as f64 * c)
        .collect()
}

/// Coefficients of the antiderivative with zero constant term.
pub(crate) fn antiderivative(coeffs: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(coeffs.len() + 1);
    out.push(0.0);
    out.extend(coeffs.iter().enumerate().map(|(k, &c)| c / (k + 1) as f64));
    out
}

/// Drop trailing coefficients that are negligible relative to the largest one.
fn trim(coeffs: &[f64]) -> &[f64] {
    let scale = coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    if scale == 0.0 {
        return &coeffs[..0];
    }
    let mut n = coeffs.len();
    while n > 0 && coeffs[n - 1].abs() <= 1e-14 * scale {
        n -= 1;
    }
    &coeffs[..n]
}

/// All real roots of the polynomial inside `[lo, hi]`, ascending.
///
/// Points where the polynomial merely touches zero (even-order roots)
/// are included when the residual is at roundoff level; callers use the
/// result to split integration ranges or enumerate extrema candidates,
/// so a spurious near-root is harmless.
pub(crate) fn real_roots_in(coeffs: &[f64], lo: f64, hi: f64) -> Vec<f64> {
    let c = trim(coeffs);
    let mut roots = Vec::new();
    if c.len() <= 1 {
        return roots;
    }
    if c.len() == 2 {
        let r = -c[0] / c[1];
        if r >= lo && r <= hi {
            roots.push(r);
        }
        return roots;
    }

    let scale = c.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let span = (hi - lo).max(1.0);
    let near_zero = 1e-12 * scale * span.powi((c.len() - 1) as i32);

    let deriv = differentiate(c);
    let mut breaks = vec![lo];
    breaks.extend(real_roots_in(&deriv, lo, hi));
    breaks.push(hi);
    breaks.dedup_by(|a, b| (*a - *b).abs() <= 1e-15 * span);

    for w in breaks.windows(2) {
        let (u, v) = (w[0], w[1]);
        let (fu, fv) = (eval(c, u), eval(c, v));
        if fu.abs() <= near_zero {
            push_root(&mut roots, u, span);
        }
        if fu * fv < 0.0 {
            push_root(&mut roots, bisect(c, u, v, fu), span);
        }
    }
    let f_hi = eval(c, hi);
    if f_hi.abs() <= near_zero {
        push_root(&mut roots, hi, span);
    }
    roots
}

fn push_root(roots: &mut Vec<f64>, r: f64, span: f64) {
    if roots.last().map_or(true, |&p| (r - p).abs() > 1e-13 * span) {
        roots.push(r);
    }
}

fn bisect(coeffs: &[f64], mut lo: f64, mut hi: f64, f_lo: f64) -> f64 {
    let mut s_lo = f_lo.signum();
    for _ in 0..130 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = eval(coeffs, mid);
        if fm == 0.0 {
            return mid;
        }
        if fm.signum() == s_lo {
            lo = mid;
        } else {
            hi = mid;
            let _ = &mut s_lo;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn horner_matches_direct() {
        // 2 - x + 3x^2 at x = 0.5: 2 - 0.5 + 0.75 = 2.25
        assert_eq!(eval(&[2.0, -1.0, 3.0], 0.5), 2.25);
    }

    #[test]
    fn derivative_and_antiderivative() {
        let c = [1.0, 2.0, 3.0]; // 1 + 2x + 3x^2
        assert_eq!(differentiate(&c), vec![2.0, 6.0]);
        let a = antiderivative(&c); // x + x^2 + x^3
        assert_eq!(a, vec![0.0, 1.0, 1.0, 1.0]);
    }

    #[test]
    fn roots_of_cubic() {
        // (x - 0.5)(x + 0.25)x = x^3 - 0.25x^2 - 0.125x
        let c = [0.0, -0.125, -0.25, 1.0];
        let roots = real_roots_in(&c, -1.0, 1.0);
        assert_eq!(roots.len(), 3);
        assert!((roots[0] + 0.25).abs() < 1e-13);
        assert!(roots[1].abs() < 1e-13);
        assert!((roots[2] - 0.5).abs() < 1e-13);
    }

    #[test]
    fn no_roots_outside_interval() {
        // x^2 - 4 has roots at +-2, none in [-1, 1]
        assert!(real_roots_in(&[-4.0, 0.0, 1.0], -1.0, 1.0).is_empty());
    }

    #[test]
    fn double_root_detected() {
        // (x - 0.3)^2: touches zero, sign never flips
        let roots = real_roots_in(&[0.09, -0.6, 1.0], -1.0, 1.0);
        assert_eq!(roots.len(), 1);
        assert!((roots[0] - 0.3).abs() < 1e-7);
    }
}
