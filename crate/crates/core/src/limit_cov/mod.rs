//! Limiting covariance integrals `h_{s,M,α}`, their finite-`n` block-sum
//! counterparts, and the ordering and maximal-inequality checks built on
//! them.

mod checks;
mod finite;

use serde::Serialize;

pub use checks::{
    chaining_constant, maximal_inequality_check, separation_decay, slepian_order_check, DecayRow,
    MaximalReport, SlepianReport,
};
pub use finite::{convergence_ratio, h_finite_sum, Branch, FiniteBlockSum, ScaledSum};

use crate::error::{invalid, Error, Result};
use crate::quadrature::integrate;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// `∫_{M^{s+δ−1}}^{M^{s+δ}}`.
    UpperBoundH,
    /// `∫_{M^s}^{M^{s+1}}`.
    LowerBoundHTilde,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LimitCovariance {
    pub s: i32,
    pub m: f64,
    pub delta: f64,
    pub alpha: f64,
    pub variant: Variant,
}

impl LimitCovariance {
    pub fn new(s: i32, m: f64, delta: f64, alpha: f64, variant: Variant) -> Result<Self> {
        if !(m > 1.0 && m.is_finite()) {
            return Err(invalid("M", format!("must exceed 1, got {m}")));
        }
        if !(delta > 0.0 && delta < 0.5) && !(variant == Variant::UpperBoundH && delta == 0.5) {
            return Err(invalid("delta", format!("must lie in (0, 1/2), got {delta}")));
        }
        if !(alpha > -1.0 && alpha.is_finite()) {
            return Err(invalid("alpha", format!("must be > -1, got {alpha}")));
        }
        Ok(Self {
            s,
            m,
            delta,
            alpha,
            variant,
        })
    }

    /// Same parameters with block offset `s`.
    pub fn with_offset(&self, s: i32) -> Self {
        Self { s, ..*self }
    }

    /// Integration limits `(lower, upper)`.
    pub fn limits(&self) -> (f64, f64) {
        let s = self.s as f64;
        match self.variant {
            Variant::UpperBoundH => (self.m.powf(s + self.delta - 1.0), self.m.powf(s + self.delta)),
            Variant::LowerBoundHTilde => (self.m.powf(s), self.m.powf(s + 1.0)),
        }
    }

    pub fn h(&self, t: f64) -> Result<f64> {
        h_integral(self, t)
    }
}

/// `(e^{−t·lo} − e^{−t·hi}) / t`.
fn exponential_closed_form(lo: f64, hi: f64, t: f64) -> f64 {
    (-t * lo).exp() * -(-t * (hi - lo)).exp_m1() / t
}

/// `∫ x^α e^{−xt} dx` over the variant's limits, by adaptive quadrature in
/// `y = ln x`. At `α = 0` the closed form is checked against it.
pub fn h_integral(lc: &LimitCovariance, t: f64) -> Result<f64> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(invalid("t", format!("must be positive, got {t}")));
    }
    let (lo, hi) = lc.limits();
    let a1 = lc.alpha + 1.0;
    let f = |y: f64| (a1 * y - t * y.exp()).exp();
    let (ya, yb) = (lo.ln(), hi.ln());
    // Split at the mode of the integrand and a few widths around it.
    let mode = (a1 / t).ln();
    let mut cuts = vec![ya];
    for c in [mode - 2.0, mode, mode + 1.0, mode + 2.0] {
        if c > ya && c < yb {
            cuts.push(c);
        }
    }
    cuts.push(yb);
    let mut value = 0.0;
    for w in cuts.windows(2) {
        value += integrate(f, w[0], w[1], 1e-13, 0.0, 4000)?.value;
    }
    if !(value > 0.0 && value.is_finite()) {
        return Err(Error::Accuracy(format!(
            "h({t}) over [{lo:e}, {hi:e}] is {value}, outside the representable range"
        )));
    }
    if lc.alpha == 0.0 {
        let exact = exponential_closed_form(lo, hi, t);
        if ((value - exact) / exact).abs() > 1e-9 {
            return Err(Error::Accuracy(format!(
                "quadrature {value} disagrees with closed form {exact} at t = {t}"
            )));
        }
    }
    Ok(value)
}

/// `h_s(t₁+t₂) / √(h_0(2t₁) h_0(2t₂))`.
pub fn corr_c(lc: &LimitCovariance, t1: f64, t2: f64) -> Result<f64> {
    let base = lc.with_offset(0);
    let num = lc.h(t1 + t2)?;
    if lc.s == 0 && t1 == t2 {
        return Ok(1.0);
    }
    Ok(num / (base.h(2.0 * t1)? * base.h(2.0 * t2)?).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn upper(s: i32, m: f64, delta: f64, alpha: f64) -> LimitCovariance {
        LimitCovariance::new(s, m, delta, alpha, Variant::UpperBoundH).unwrap()
    }

    #[test]
    fn validation() {
        assert!(LimitCovariance::new(0, 1.0, 0.3, 0.0, Variant::UpperBoundH).is_err());
        assert!(LimitCovariance::new(0, 8.0, 0.7, 0.0, Variant::UpperBoundH).is_err());
        assert!(LimitCovariance::new(0, 8.0, 0.3, -1.0, Variant::UpperBoundH).is_err());
        assert!(upper(0, 8.0, 0.3, 0.0).h(0.0).is_err());
    }

    #[test]
    fn exponential_case_matches_closed_form() {
        for s in -2..=2 {
            for t in [0.1, 1.0, 2.5, 7.0] {
                let lc = upper(s, 8.0, 0.3, 0.0);
                let (lo, hi) = lc.limits();
                let exact = exponential_closed_form(lo, hi, t);
                let got = lc.h(t).unwrap();
                assert!(((got - exact) / exact).abs() < 1e-12, "s={s} t={t}: {got} {exact}");
            }
        }
        let tilde = LimitCovariance::new(1, 8.0, 0.3, 0.0, Variant::LowerBoundHTilde).unwrap();
        assert_eq!(tilde.limits(), (8.0, 64.0));
        let exact = exponential_closed_form(8.0, 64.0, 0.5);
        assert!(((tilde.h(0.5).unwrap() - exact) / exact).abs() < 1e-12);
    }

    #[test]
    fn riemann_oracle_at_alpha_two() {
        let lc = upper(0, 8.0, 0.3, 2.0);
        let (lo, hi) = lc.limits();
        let n = 10_000_000usize;
        let w = (hi - lo) / n as f64;
        let mut s = crate::stats::CompensatedSum::new();
        for k in 0..n {
            let x = lo + (k as f64 + 0.5) * w;
            s.add(x * x * (-2.0 * x).exp());
        }
        let oracle = s.value() * w;
        let got = lc.h(2.0).unwrap();
        assert!(((got - oracle) / oracle).abs() < 1e-6, "{got} {oracle}");
    }

    #[test]
    fn h_decreasing_in_t() {
        for alpha in [0.0, 1.0, 2.0] {
            let lc = upper(1, 8.0, 0.3, alpha);
            let mut prev = f64::INFINITY;
            for k in 1..30 {
                let v = lc.h(0.2 * k as f64).unwrap();
                assert!(v < prev);
                prev = v;
            }
        }
    }

    #[test]
    fn correlation_basic_properties() {
        let lc = upper(0, 8.0, 0.3, 1.0);
        assert_eq!(corr_c(&lc, 1.3, 1.3).unwrap(), 1.0);
        let a = corr_c(&lc, 0.7, 2.1).unwrap();
        let b = corr_c(&lc, 2.1, 0.7).unwrap();
        assert!((a - b).abs() < 1e-15);
        assert!(a > 0.0 && a < 1.0 - 1e-9);
    }

    #[test]
    fn wide_window_tends_to_sech() {
        for alpha in [0.0, 1.0, 2.0] {
            let lc = upper(0, 1e6, 0.5, alpha);
            for (s1, s2) in [(-1.5, 1.5), (0.0, 2.0), (-0.5, 0.5), (1.0, -1.0)] {
                let c = corr_c(&lc, f64::exp(s1), f64::exp(s2)).unwrap();
                let want = (1.0 / ((s1 - s2) / 2.0f64).cosh()).powf(alpha + 1.0);
                assert!((c - want).abs() < 1e-3, "α={alpha} ({s1},{s2}): {c} vs {want}");
            }
        }
    }
}
