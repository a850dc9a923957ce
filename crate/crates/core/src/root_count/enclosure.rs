//! Rigorous sign and monotonicity tests for a polynomial on `[0, 1]`.
//!
//! Every bound folds in a conservative Horner rounding model
//! (`γ = (2n+4)(K+2)·ε` relative to the absolute-value polynomial), so a
//! passing test is a proof for the polynomial whose coefficients are the
//! given floats.

const EPS: f64 = f64::EPSILON;

/// Polynomial in ascending powers restricted to `[0, 1]`.
#[derive(Debug, Clone)]
pub(crate) struct Branch {
    pub c: Vec<f64>,
    pub abs: Vec<f64>,
}

impl Branch {
    pub fn new(c: Vec<f64>) -> Self {
        let abs = c.iter().map(|v| v.abs()).collect();
        Self { c, abs }
    }

    pub fn degree(&self) -> usize {
        self.c.len() - 1
    }

    /// Sign of `f(0) = c_0`, exact.
    pub fn sign_at_zero(&self) -> f64 {
        self.c[0].signum()
    }

    fn gamma(&self, order: usize) -> f64 {
        (2.0 * self.degree() as f64 + 4.0) * (order as f64 + 2.0) * EPS
    }

    /// Certified sign of `f(x)` for `x ∈ [0, 1]`, or `None` when the
    /// computed value is within its rounding bound.
    #[inline]
    pub fn sign_at(&self, x: f64) -> Option<f64> {
        let mut v = 0.0;
        let mut a = 0.0;
        for i in (0..self.c.len()).rev() {
            v = v * x + self.c[i];
            a = a * x + self.abs[i];
        }
        let err = self.gamma(0) * a + f64::MIN_POSITIVE;
        if v.abs() > err {
            Some(v.signum())
        } else {
            None
        }
    }
}

/// Taylor data of `f` about `m` with radius `r`.
pub(crate) struct Enclosure {
    /// Lower bound of `|f|` on the interval (may be negative).
    pub value_margin: f64,
    /// Lower bound of `|f'|` on the interval (may be negative).
    pub slope_margin: f64,
}

/// Reusable buffers for Taylor shifts.
#[derive(Debug, Default)]
pub(crate) struct Scratch {
    work: Vec<f64>,
    d: Vec<f64>,
    dabs: Vec<f64>,
}

fn taylor_coefficients(src: &[f64], z: f64, upto: usize, work: &mut Vec<f64>, out: &mut Vec<f64>) {
    let n = src.len() - 1;
    work.clear();
    work.extend_from_slice(src);
    out.clear();
    for k in 0..=upto {
        if k > n {
            out.push(0.0);
            continue;
        }
        for i in (k..n).rev() {
            work[i] += z * work[i + 1];
        }
        out.push(work[k]);
    }
}

/// Enclose `f` and `f'` on `[lo, hi] ⊂ [0, 1]` with a Taylor expansion of
/// order `order` about the midpoint and a Lagrange remainder bounded by the
/// absolute-value polynomial at `hi`.
pub(crate) fn enclose(b: &Branch, lo: f64, hi: f64, order: usize, s: &mut Scratch) -> Enclosure {
    let m = 0.5 * (lo + hi);
    let r = (hi - m).max(m - lo) * (1.0 + 4.0 * EPS);
    let top = (m + r).min(1.0 + 4.0 * EPS);
    let gamma = b.gamma(order);

    taylor_coefficients(&b.c, m, order, &mut s.work, &mut s.d);
    taylor_coefficients(&b.abs, m, order, &mut s.work, &mut s.dabs);
    let d = &s.d;
    let dabs = &s.dabs;
    // G_{K+1}(top): (K+1)-th Taylor coefficient of the absolute polynomial.
    let mut tail = Vec::with_capacity(order + 2);
    taylor_coefficients(&b.abs, top, order + 1, &mut s.work, &mut tail);
    let g = tail[order + 1] * (1.0 + gamma);

    let err = |k: usize| gamma * dabs[k] + f64::MIN_POSITIVE;

    let mut spread = 0.0;
    let mut rk = 1.0;
    for k in 1..=order {
        rk *= r;
        spread += (d[k].abs() + err(k)) * rk;
    }
    let rem = rk * r * g;
    let value_margin = d[0].abs() - err(0) - spread - rem;

    let mut slope_margin = f64::NEG_INFINITY;
    if order >= 1 {
        let mut sp = 0.0;
        let mut rk1 = 1.0;
        for k in 2..=order {
            rk1 *= r;
            sp += k as f64 * (d[k].abs() + err(k)) * rk1;
        }
        let rk_full = rk;
        let drem = (order as f64 + 1.0) * rk_full * g;
        slope_margin = d[1].abs() - err(1) - sp - drem;
    }
    Enclosure {
        value_margin,
        slope_margin,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn taylor_shift_matches_derivatives() {
        // f = 1 - 2x + 3x² + x³ at z = 0.5: f = 0.875, f' = 1.75, f''/2 = 4.5, f'''/6 = 1.
        let mut w = Vec::new();
        let mut out = Vec::new();
        taylor_coefficients(&[1.0, -2.0, 3.0, 1.0], 0.5, 4, &mut w, &mut out);
        assert_eq!(out, vec![0.875, 1.75, 4.5, 1.0, 0.0]);
    }

    #[test]
    fn positive_quadratic_certified() {
        let b = Branch::new(vec![1.0, 0.0, 1.0]);
        let mut s = Scratch::default();
        let e = enclose(&b, 0.0, 1.0, 3, &mut s);
        assert!(e.value_margin > 0.0);
    }

    #[test]
    fn root_inside_is_never_excluded() {
        // (x - 0.3)(x - 0.31) has two roots in [0.25, 0.4].
        let b = Branch::new(vec![0.093, -0.61, 1.0]);
        let mut s = Scratch::default();
        for (lo, hi) in [(0.25, 0.4), (0.29, 0.305), (0.0, 1.0)] {
            assert!(enclose(&b, lo, hi, 3, &mut s).value_margin <= 0.0);
        }
        // A single simple root on [0.25, 0.305] but f' vanishes at 0.305.
        assert!(enclose(&b, 0.25, 0.3, 3, &mut s).slope_margin > 0.0);
    }

    #[test]
    fn sign_at_respects_rounding() {
        let b = Branch::new(vec![-1.0, 1.0]);
        assert_eq!(b.sign_at(0.5), Some(-1.0));
        assert_eq!(b.sign_at(1.0), None);
    }
}
