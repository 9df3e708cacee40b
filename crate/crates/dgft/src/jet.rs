//! Degree-4 truncated Taylor arithmetic in the time increment s.
//!
//! A `Jet` holds the coefficients of a series a_0 + a_1 s + ... + a_4 s^4.
//! Products and reciprocals truncate at s^4, which is all the solver
//! needs: on a cell whose endpoint moves with the shock, the reference
//! coordinate of a fixed spatial point is a rational function of t, and
//! composing the cell polynomial with its jet yields the Eulerian time
//! derivatives of the solution up to order four.

pub(crate) const JET_LEN: usize = 5;

#[derive(Debug, Clone, Copy)]
pub(crate) struct Jet(pub [f64; JET_LEN]);

impl Jet {
    pub fn constant(v: f64) -> Self {
        let mut c = [0.0; JET_LEN];
        c[0] = v;
        Jet(c)
    }

    /// Series from derivative values d_l = (d/ds)^l at s = 0.
    pub fn from_derivs(d: &[f64]) -> Self {
        let mut c = [0.0; JET_LEN];
        let mut fact = 1.0;
        for (l, slot) in c.iter_mut().enumerate() {
            if l > 0 {
                fact *= l as f64;
            }
            if l < d.len() {
                *slot = d[l] / fact;
            }
        }
        Jet(c)
    }

    /// Derivative value (d/ds)^l at s = 0.
    pub fn deriv(&self, l: usize) -> f64 {
        let mut fact = 1.0;
        for k in 2..=l {
            fact *= k as f64;
        }
        self.0[l] * fact
    }

    pub fn add(&self, o: &Jet) -> Jet {
        let mut c = self.0;
        for (a, b) in c.iter_mut().zip(&o.0) {
            *a += b;
        }
        Jet(c)
    }

    pub fn sub(&self, o: &Jet) -> Jet {
        let mut c = self.0;
        for (a, b) in c.iter_mut().zip(&o.0) {
            *a -= b;
        }
        Jet(c)
    }

    pub fn scale(&self, s: f64) -> Jet {
        let mut c = self.0;
        for a in c.iter_mut() {
            *a *= s;
        }
        Jet(c)
    }

    pub fn mul(&self, o: &Jet) -> Jet {
        let mut c = [0.0; JET_LEN];
        for i in 0..JET_LEN {
            for j in 0..JET_LEN - i {
                c[i + j] += self.0[i] * o.0[j];
            }
        }
        Jet(c)
    }

    /// Series reciprocal; requires a nonzero constant term.
    pub fn recip(&self) -> Jet {
        let a0 = self.0[0];
        debug_assert!(a0 != 0.0, "jet reciprocal of a series with zero constant");
        let mut r = [0.0; JET_LEN];
        r[0] = 1.0 / a0;
        for k in 1..JET_LEN {
            let mut acc = 0.0;
            for i in 1..=k {
                acc += self.0[i] * r[k - i];
            }
            r[k] = -acc / a0;
        }
        Jet(r)
    }
}

/// Legendre polynomials of a jet argument: out[k] = P_k(xi) as a series.
pub(crate) fn legendre_jets(p: usize, xi: &Jet) -> Vec<Jet> {
    let mut out = Vec::with_capacity(p + 1);
    out.push(Jet::constant(1.0));
    if p == 0 {
        return out;
    }
    out.push(*xi);
    for k in 1..p {
        let a = xi.mul(&out[k]).scale((2 * k + 1) as f64);
        let b = out[k - 1].scale(k as f64);
        out.push(a.sub(&b).scale(1.0 / (k + 1) as f64));
    }
    out
}
