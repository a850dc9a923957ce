use rand::Rng;

use super::{CoefficientDistribution, RegularlyVaryingWeight};
use crate::error::{invalid, Error, Result};

/// One realization `a_0..a_n` of the random polynomial, ascending powers.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialSample {
    coefficients: Vec<f64>,
}

impl PolynomialSample {
    pub fn new(coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(Error::DegenerateInput("empty coefficient vector".into()));
        }
        if let Some(i) = coefficients.iter().position(|c| !c.is_finite()) {
            return Err(invalid("coefficients", format!("a_{i} is not finite")));
        }
        Ok(Self { coefficients })
    }

    pub fn degree(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn into_coefficients(self) -> Vec<f64> {
        self.coefficients
    }

    /// Coefficients in descending order, `Q̂(x) = x^n Q(1/x)`.
    pub fn reversed(&self) -> Self {
        let mut c = self.coefficients.clone();
        c.reverse();
        Self { coefficients: c }
    }

    /// Plain Horner evaluation.
    pub fn eval(&self, x: f64) -> f64 {
        horner(&self.coefficients, x)
    }
}

#[inline]
pub fn horner(c: &[f64], x: f64) -> f64 {
    let mut acc = 0.0;
    for &a in c.iter().rev() {
        acc = acc * x + a;
    }
    acc
}

/// Sampler for fixed `(n, weight, distribution)` with a precomputed `√R` table.
#[derive(Debug, Clone)]
pub struct PolynomialModel {
    weight: RegularlyVaryingWeight,
    dist: CoefficientDistribution,
    sqrt_r: Vec<f64>,
}

impl PolynomialModel {
    pub fn new(n: usize, weight: RegularlyVaryingWeight, dist: CoefficientDistribution) -> Result<Self> {
        if !dist.is_standardized() {
            return Err(invalid("distribution", "must be standardized to mean 0, variance 1"));
        }
        Ok(Self {
            weight,
            dist,
            sqrt_r: weight.sqrt_table(n),
        })
    }

    pub fn degree(&self) -> usize {
        self.sqrt_r.len() - 1
    }

    pub fn weight(&self) -> &RegularlyVaryingWeight {
        &self.weight
    }

    pub fn distribution(&self) -> &CoefficientDistribution {
        &self.dist
    }

    /// Fill `out` with `a_i = √R(i) ξ_i`, drawing `ξ_0, ξ_1, …` in order.
    #[inline]
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut Vec<f64>) {
        out.clear();
        out.extend(self.sqrt_r.iter().map(|s| s * self.dist.sample(rng)));
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> PolynomialSample {
        let mut c = Vec::with_capacity(self.sqrt_r.len());
        self.sample_into(rng, &mut c);
        PolynomialSample { coefficients: c }
    }
}

pub fn sample_polynomial<R: Rng + ?Sized>(
    n: usize,
    weight: &RegularlyVaryingWeight,
    dist: &CoefficientDistribution,
    rng: &mut R,
) -> Result<PolynomialSample> {
    Ok(PolynomialModel::new(n, *weight, dist.clone())?.sample(rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly_model::SlowlyVarying;
    use crate::rng::StreamKey;
    use crate::stats::Moments;

    #[test]
    fn fixed_seed_reproduces_sample() {
        let w = RegularlyVaryingWeight::new(1.0, SlowlyVarying::LogShifted).unwrap();
        let d = CoefficientDistribution::gaussian();
        let k = StreamKey::new(42, "sample", 0);
        let a = sample_polynomial(4, &w, &d, &mut k.rng(0)).unwrap();
        let b = sample_polynomial(4, &w, &d, &mut k.rng(0)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.coefficients().len(), 5);
    }

    #[test]
    fn unstandardized_distribution_rejected() {
        let w = RegularlyVaryingWeight::new(0.0, SlowlyVarying::Constant).unwrap();
        let d = CoefficientDistribution::uniform_symmetric(1.0).unwrap();
        assert!(sample_polynomial(3, &w, &d, &mut StreamKey::new(0, "x", 0).rng(0)).is_err());
    }

    #[test]
    fn normalized_coefficients_have_unit_moments() {
        let w = RegularlyVaryingWeight::new(1.5, SlowlyVarying::InverseLog).unwrap();
        let model = PolynomialModel::new(6, w, CoefficientDistribution::gaussian()).unwrap();
        let k = StreamKey::new(9, "moments", 0);
        let mut stats = vec![Moments::default(); 7];
        let mut buf = Vec::new();
        let trials = 100_000u64;
        for t in 0..trials {
            model.sample_into(&mut k.rng(t), &mut buf);
            for (i, a) in buf.iter().enumerate() {
                stats[i].push(a / w.r(i as u64).sqrt());
            }
        }
        for s in &stats {
            assert!((0.98..=1.02).contains(&s.variance()), "{}", s.variance());
            assert!(s.mean().abs() < 4.0 / (trials as f64).sqrt(), "{}", s.mean());
        }
    }

    #[test]
    fn reversal_round_trips() {
        let p = PolynomialSample::new(vec![1.0, 2.0, 3.0]).unwrap();
        assert_eq!(p.reversed().coefficients(), &[3.0, 2.0, 1.0]);
        assert_eq!(p.reversed().reversed(), p);
        assert!(PolynomialSample::new(vec![]).is_err());
        assert!(PolynomialSample::new(vec![f64::NAN]).is_err());
    }
}
