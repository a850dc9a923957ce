use serde::Serialize;

use super::{PolynomialSample, RegularlyVaryingWeight};
use crate::error::{invalid, Error, Result};

/// Parameters of the `u`-partition `A_0, A_{±1}, A_{±2}` and the index
/// blocks `B_r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegionParams {
    pub k: f64,
    pub h: f64,
    pub d: f64,
    pub l: f64,
}

impl Default for RegionParams {
    fn default() -> Self {
        Self {
            k: 8.0,
            h: 1.0,
            d: 64.0,
            l: 2.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Region {
    Minus2,
    Minus1,
    Zero,
    Plus1,
    Plus2,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizedEvaluator {
    n: usize,
    weight: RegularlyVaryingWeight,
    params: RegionParams,
    ln_n: f64,
}

impl NormalizedEvaluator {
    pub fn new(n: usize, weight: RegularlyVaryingWeight, params: RegionParams) -> Result<Self> {
        if n == 0 {
            return Err(invalid("n", "normalized evaluation needs degree ≥ 1"));
        }
        for (name, v) in [("K", params.k), ("h", params.h), ("D", params.d), ("L", params.l)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(name, format!("must be finite and positive, got {v}")));
            }
        }
        Ok(Self {
            n,
            weight,
            params,
            ln_n: (n as f64).ln(),
        })
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    pub fn params(&self) -> RegionParams {
        self.params
    }

    /// Boundary between `A_0` and `A_{±1}`.
    pub fn inner_edge(&self) -> f64 {
        self.params.k / self.n as f64
    }

    /// Boundary between `A_{±1}` and `A_{±2}`. Infinite at `n = 1`.
    pub fn outer_edge(&self) -> f64 {
        self.params.h / self.ln_n
    }

    pub fn region(&self, u: f64) -> Result<Region> {
        if u.is_nan() {
            return Err(Error::Invariant("u = NaN lies in no region".into()));
        }
        let a = u.abs();
        let r = if a <= self.inner_edge() {
            Region::Zero
        } else if a <= self.outer_edge() {
            if u > 0.0 {
                Region::Plus1
            } else {
                Region::Minus1
            }
        } else if u > 0.0 {
            Region::Plus2
        } else {
            Region::Minus2
        };
        Ok(r)
    }

    /// Index block `B_r` containing coefficient index `i`.
    pub fn index_block(&self, i: usize) -> Result<Region> {
        if i > self.n {
            return Err(invalid("i", format!("index {i} exceeds degree {}", self.n)));
        }
        let (n, x) = (self.n as f64, i as f64);
        let l_log = self.params.l * self.ln_n;
        let edge = n / self.params.d;
        Ok(if x <= l_log {
            Region::Minus2
        } else if x <= edge {
            Region::Minus1
        } else if x <= n - edge {
            Region::Zero
        } else if x <= n - l_log {
            Region::Plus1
        } else {
            Region::Plus2
        })
    }

    /// `ln σ_n(u)²`.
    pub fn ln_sigma_sq(&self, u: f64) -> Result<f64> {
        let w = &self.weight;
        let n = self.n as f64;
        Ok(match self.region(u)? {
            Region::Zero => {
                (w.alpha() + 1.0) * self.ln_n + w.slowly_varying().eval(n).ln() + 2.0 * n * u
            }
            // Var Q_n(e^u) ≈ R(n) e^{2nu} / (1 - e^{-2u}); keep its order in u.
            Region::Plus1 | Region::Plus2 => w.ln_r_real(n) + 2.0 * n * u - u.ln(),
            Region::Minus1 | Region::Minus2 => {
                let a = u.abs();
                -(w.alpha() + 1.0) * a.ln() + w.slowly_varying().eval(1.0 / a).ln()
            }
        })
    }

    pub fn sigma_n(&self, u: f64) -> Result<f64> {
        Ok((0.5 * self.ln_sigma_sq(u)?).exp())
    }

    /// `Q_n(sign·e^u) / σ_n(u)`.
    pub fn evaluate_normalized(&self, sample: &PolynomialSample, u: f64, sign: f64) -> Result<f64> {
        if sample.degree() != self.n {
            return Err(invalid(
                "sample",
                format!("degree {} does not match evaluator degree {}", sample.degree(), self.n),
            ));
        }
        let (mantissa, log_scale) = scaled_value(sample, u, sign);
        let v = mantissa * (log_scale - 0.5 * self.ln_sigma_sq(u)?).exp();
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Overflow { u })
        }
    }
}

/// `Q_n(sign·e^u) = mantissa · e^{log_scale}`.
///
/// For `u > 0` the reversed polynomial is evaluated at `sign·e^{−u}` and the
/// `x^n` factor is returned as `log_scale = n·u`.
pub fn scaled_value(sample: &PolynomialSample, u: f64, sign: f64) -> (f64, f64) {
    let c = sample.coefficients();
    let n = sample.degree();
    if u <= 0.0 {
        (super::horner(c, sign * u.exp()), 0.0)
    } else {
        let y = sign * (-u).exp();
        let mut acc = 0.0;
        for &a in c {
            acc = acc * y + a;
        }
        let parity = if sign < 0.0 && n % 2 == 1 { -1.0 } else { 1.0 };
        (parity * acc, n as f64 * u)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly_model::{CoefficientDistribution, PolynomialModel, SlowlyVarying};
    use crate::rng::StreamKey;
    use num_bigint::BigInt;
    use num_rational::BigRational;
    use num_traits::{FromPrimitive, ToPrimitive};

    fn flat() -> RegularlyVaryingWeight {
        RegularlyVaryingWeight::new(0.0, SlowlyVarying::Constant).unwrap()
    }

    #[test]
    fn negative_side_is_inverse_distance() {
        let e = NormalizedEvaluator::new(100, flat(), RegionParams::default()).unwrap();
        for u in [-0.1, -0.5, -3.0] {
            assert!(matches!(e.region(u).unwrap(), Region::Minus1 | Region::Minus2));
            let s = e.sigma_n(u).unwrap();
            assert!((s * s - 1.0 / u.abs()).abs() < 1e-12 / u.abs());
        }
    }

    #[test]
    fn centre_value() {
        let e = NormalizedEvaluator::new(100, flat(), RegionParams::default()).unwrap();
        assert_eq!(e.region(0.0).unwrap(), Region::Zero);
        assert!((e.sigma_n(0.0).unwrap().powi(2) - 100.0).abs() < 1e-10);
    }

    #[test]
    fn plus_one_matches_finite_sum_order() {
        // K = 4 so that u = 0.05 > K/n lies in A_{+1} at n = 100.
        let p = RegionParams { k: 4.0, ..RegionParams::default() };
        let e = NormalizedEvaluator::new(100, flat(), p).unwrap();
        let u = 0.05;
        assert_eq!(e.region(u).unwrap(), Region::Plus1);
        let ln_s2 = e.ln_sigma_sq(u).unwrap();
        assert!((ln_s2 - (10.0 - u.ln())).abs() < 1e-12);
        // Exact variance Σ_i e^{2iu}, scaled by e^{-2nu}. With the default
        // D and L the block B_1 is empty at this degree, so the whole sum
        // is the comparison target.
        let exact: f64 = (0..=100).map(|i| (2.0 * (i as f64 - 100.0) * u).exp()).sum();
        let ratio = exact / (ln_s2 - 10.0).exp();
        assert!((0.25..=1.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn regions_partition_the_line() {
        let e = NormalizedEvaluator::new(1000, flat(), RegionParams::default()).unwrap();
        let edges = [e.inner_edge(), e.outer_edge()];
        assert!(edges[0] < edges[1]);
        assert_eq!(e.region(edges[0]).unwrap(), Region::Zero);
        assert_eq!(e.region(edges[1]).unwrap(), Region::Plus1);
        assert_eq!(e.region(-edges[1] * 1.01).unwrap(), Region::Minus2);
        assert!(e.region(f64::NAN).is_err());
    }

    #[test]
    fn constant_polynomial() {
        let e = NormalizedEvaluator::new(3, flat(), RegionParams::default()).unwrap();
        let s = PolynomialSample::new(vec![2.5, 0.0, 0.0, 0.0]).unwrap();
        for u in [-4.0, -0.2, 0.0, 0.3] {
            let v = e.evaluate_normalized(&s, u, 1.0).unwrap();
            let want = 2.5 / e.sigma_n(u).unwrap();
            assert!((v - want).abs() <= 1e-13 * want.abs(), "u={u}");
        }
    }

    #[test]
    fn reversed_code_path_is_exact_identity() {
        let model = PolynomialModel::new(21, flat(), CoefficientDistribution::gaussian()).unwrap();
        let k = StreamKey::new(5, "rev", 0);
        for t in 0..50 {
            let s = model.sample(&mut k.rng(t));
            let r = s.reversed();
            for u in [0.01, 0.4, 3.0] {
                for sign in [1.0, -1.0] {
                    let (m, l) = scaled_value(&s, u, sign);
                    let (mr, lr) = scaled_value(&r, -u, sign);
                    let parity = if sign < 0.0 { -1.0 } else { 1.0 };
                    assert_eq!(m, parity * mr);
                    assert_eq!(l, 21.0 * u);
                    assert_eq!(lr, 0.0);
                }
            }
        }
    }

    #[test]
    fn reversal_identity_degree_twenty() {
        let model = PolynomialModel::new(20, flat(), CoefficientDistribution::gaussian()).unwrap();
        let k = StreamKey::new(6, "rev20", 0);
        for t in 0..200 {
            let s = model.sample(&mut k.rng(t));
            for x in [0.3, -0.7, 0.95, -0.999] {
                let direct = s.eval(x);
                let via = x.powi(20) * s.reversed().eval(1.0 / x);
                let scale: f64 = s.coefficients().iter().map(|c| c.abs()).sum();
                assert!((direct - via).abs() <= 1e-12 * scale.max(direct.abs()), "x={x}");
            }
        }
    }

    fn exact_value(c: &[f64], x: f64) -> f64 {
        let xr = BigRational::from_f64(x).unwrap();
        let mut acc = BigRational::from_integer(BigInt::from(0));
        for &a in c.iter().rev() {
            acc = acc * &xr + BigRational::from_f64(a).unwrap();
        }
        acc.to_f64().unwrap()
    }

    #[test]
    fn degree_fifty_matches_exact_rational_reference() {
        let model = PolynomialModel::new(50, flat(), CoefficientDistribution::gaussian()).unwrap();
        let e = NormalizedEvaluator::new(50, flat(), RegionParams::default()).unwrap();
        let k = StreamKey::new(8, "ref50", 0);
        let u = 0.3f64;
        for t in 0..20 {
            let s = model.sample(&mut k.rng(t));
            for sign in [1.0, -1.0] {
                // Reference: exact rational Q at the float nearest sign·e^u.
                let x = sign * u.exp();
                let reference = exact_value(s.coefficients(), x) / e.sigma_n(u).unwrap();
                let got = e.evaluate_normalized(&s, u, sign).unwrap();
                let err = (got - reference).abs();
                assert!(err <= 1e-9 * reference.abs(), "t={t} sign={sign}: {got} vs {reference}");
            }
        }
    }

    #[test]
    fn stays_finite_at_extremes() {
        let w = RegularlyVaryingWeight::new(2.0, SlowlyVarying::LogShifted).unwrap();
        let n = 10_000;
        let e = NormalizedEvaluator::new(n, w, RegionParams::default()).unwrap();
        let mut c = vec![0.0; n + 1];
        for (i, v) in c.iter_mut().enumerate() {
            let xi = if i % 3 == 0 { 10.0 } else { -7.5 };
            *v = w.r(i as u64).sqrt() * xi;
        }
        let s = PolynomialSample::new(c).unwrap();
        for u in [-50.0, -1.0, -1e-3, 0.0, 1e-4, 1e-3, 0.5, 50.0] {
            for sign in [1.0, -1.0] {
                let v = e.evaluate_normalized(&s, u, sign).unwrap();
                assert!(v.is_finite(), "u={u}");
            }
        }
    }
}
