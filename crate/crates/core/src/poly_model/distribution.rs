use rand::Rng;
use rand_distr::weighted::WeightedIndex;
use rand_distr::{Distribution, StandardNormal, StudentT};

use crate::error::{invalid, Error, Result};

/// Raw coefficient law before the affine standardization.
#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    Gaussian,
    Rademacher,
    /// Uniform on `[-half_width, half_width]`.
    UniformSymmetric { half_width: f64 },
    /// Finite support with the given probabilities.
    Discrete { values: Vec<f64>, probs: Vec<f64> },
    /// Student t with `df ≥ 3` degrees of freedom.
    StudentT { df: f64 },
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Gaussian => "gaussian",
            Family::Rademacher => "rademacher",
            Family::UniformSymmetric { .. } => "uniform_symmetric",
            Family::Discrete { .. } => "discrete",
            Family::StudentT { .. } => "student_t",
        }
    }
}

#[derive(Debug, Clone)]
enum Sampler {
    Gaussian,
    Rademacher,
    Uniform(f64),
    Discrete(Vec<f64>, WeightedIndex<f64>),
    StudentT(StudentT<f64>),
}

/// Coefficient distribution `ξ = (X - loc) / scale` with `X ~ family`.
#[derive(Debug, Clone)]
pub struct CoefficientDistribution {
    family: Family,
    loc: f64,
    scale: f64,
    sampler: Sampler,
}

impl PartialEq for CoefficientDistribution {
    fn eq(&self, other: &Self) -> bool {
        self.family == other.family && self.loc == other.loc && self.scale == other.scale
    }
}

impl CoefficientDistribution {
    pub fn new(family: Family) -> Result<Self> {
        let sampler = match &family {
            Family::Gaussian => Sampler::Gaussian,
            Family::Rademacher => Sampler::Rademacher,
            Family::UniformSymmetric { half_width } => {
                if !(half_width.is_finite() && *half_width >= 0.0) {
                    return Err(invalid("half_width", format!("must be finite and ≥ 0, got {half_width}")));
                }
                Sampler::Uniform(*half_width)
            }
            Family::Discrete { values, probs } => {
                if values.is_empty() || values.len() != probs.len() {
                    return Err(invalid("values", "support and probabilities must have equal, nonzero length"));
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(invalid("values", "support points must be finite"));
                }
                let idx = WeightedIndex::new(probs.iter().copied())
                    .map_err(|e| invalid("probs", e.to_string()))?;
                Sampler::Discrete(values.clone(), idx)
            }
            Family::StudentT { df } => {
                if !(df.is_finite() && *df >= 3.0) {
                    return Err(invalid("df", format!("must be ≥ 3, got {df}")));
                }
                Sampler::StudentT(StudentT::new(*df).map_err(|e| invalid("df", e.to_string()))?)
            }
        };
        Ok(Self {
            family,
            loc: 0.0,
            scale: 1.0,
            sampler,
        })
    }

    pub fn gaussian() -> Self {
        Self::new(Family::Gaussian).unwrap()
    }

    pub fn rademacher() -> Self {
        Self::new(Family::Rademacher).unwrap()
    }

    pub fn uniform_symmetric(half_width: f64) -> Result<Self> {
        Self::new(Family::UniformSymmetric { half_width })
    }

    pub fn discrete(values: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        Self::new(Family::Discrete { values, probs })
    }

    pub fn student_t(df: f64) -> Result<Self> {
        Self::new(Family::StudentT { df })
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    /// Affine map `x ↦ (x - loc) / scale` applied to raw draws.
    pub fn affine(&self) -> (f64, f64) {
        (self.loc, self.scale)
    }

    /// Mean and variance of the raw family.
    pub fn raw_moments(&self) -> (f64, f64) {
        match &self.family {
            Family::Gaussian | Family::Rademacher => (0.0, 1.0),
            Family::UniformSymmetric { half_width } => (0.0, half_width * half_width / 3.0),
            Family::Discrete { values, probs } => {
                let total: f64 = probs.iter().sum();
                let mean = values.iter().zip(probs).map(|(v, p)| v * p).sum::<f64>() / total;
                let var = values
                    .iter()
                    .zip(probs)
                    .map(|(v, p)| (v - mean) * (v - mean) * p)
                    .sum::<f64>()
                    / total;
                (mean, var)
            }
            Family::StudentT { df } => (0.0, df / (df - 2.0)),
        }
    }

    /// Mean and variance after the affine map.
    pub fn moments(&self) -> (f64, f64) {
        let (m, v) = self.raw_moments();
        ((m - self.loc) / self.scale, v / (self.scale * self.scale))
    }

    pub fn is_standardized(&self) -> bool {
        let (m, v) = self.moments();
        m.abs() <= 1e-12 && (v - 1.0).abs() <= 1e-12
    }

    /// Affine copy with mean 0 and variance 1.
    ///
    /// A family that is already standard up to rounding in its own moment
    /// formula is returned unchanged.
    pub fn standardize(&self) -> Result<Self> {
        let (m, v) = self.raw_moments();
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::DegenerateDistribution(format!(
                "{} has variance {v}",
                self.family.name()
            )));
        }
        let mut out = self.clone();
        if m.abs() <= 1e-15 && (v - 1.0).abs() <= 4.0 * f64::EPSILON {
            out.loc = 0.0;
            out.scale = 1.0;
        } else {
            out.loc = m;
            out.scale = v.sqrt();
        }
        Ok(out)
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let raw = match &self.sampler {
            Sampler::Gaussian => return rng.sample::<f64, _>(StandardNormal),
            Sampler::Rademacher => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            Sampler::Uniform(a) => a * (2.0 * rng.random::<f64>() - 1.0),
            Sampler::Discrete(values, idx) => values[idx.sample(rng)],
            Sampler::StudentT(t) => t.sample(rng),
        };
        (raw - self.loc) / self.scale
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::StreamKey;
    use crate::stats::Moments;

    fn empirical(d: &CoefficientDistribution, n: usize, seed: u64) -> Moments {
        let mut rng = StreamKey::new(seed, "dist-test", 0).rng(0);
        let mut m = Moments::default();
        for _ in 0..n {
            m.push(d.sample(&mut rng));
        }
        m
    }

    #[test]
    fn rademacher_and_uniform_unchanged() {
        let r = CoefficientDistribution::rademacher();
        assert_eq!(r.standardize().unwrap().affine(), (0.0, 1.0));
        let u = CoefficientDistribution::uniform_symmetric(3f64.sqrt()).unwrap();
        assert_eq!(u.standardize().unwrap().affine(), (0.0, 1.0));
    }

    #[test]
    fn three_point_law_moments() {
        let d = CoefficientDistribution::discrete(vec![-1.0 / 3.0, 0.0, 1.0], vec![1.0; 3]).unwrap();
        // Hand arithmetic: μ = (−1/3 + 0 + 1)/3 = 2/9;
        // E X² = (1/9 + 1)/3 = 10/27, σ² = 10/27 − 4/81 = 26/81.
        let (m, v) = d.raw_moments();
        assert!((m - 2.0 / 9.0).abs() < 1e-15);
        assert!((v - 26.0 / 81.0).abs() < 1e-15);
        let s = d.standardize().unwrap();
        let (loc, scale) = s.affine();
        assert!((loc - 2.0 / 9.0).abs() < 1e-15);
        assert!((scale - (26.0f64 / 81.0).sqrt()).abs() < 1e-15);
        let e = empirical(&s, 1_000_000, 3);
        assert!(e.mean().abs() < 4.0 * e.std_error(), "{}", e.mean());
        assert!((e.variance() - 1.0).abs() < 0.01, "{}", e.variance());
    }

    #[test]
    fn zero_variance_is_degenerate() {
        let d = CoefficientDistribution::discrete(vec![2.0], vec![1.0]).unwrap();
        assert!(matches!(d.standardize(), Err(Error::DegenerateDistribution(_))));
        let u = CoefficientDistribution::uniform_symmetric(0.0).unwrap();
        assert!(matches!(u.standardize(), Err(Error::DegenerateDistribution(_))));
    }

    #[test]
    fn student_t_requires_three_dof() {
        assert!(CoefficientDistribution::student_t(2.5).is_err());
        let t = CoefficientDistribution::student_t(5.0).unwrap().standardize().unwrap();
        assert!((t.affine().1 - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn every_family_standardizes_empirically() {
        let fams = [
            CoefficientDistribution::gaussian(),
            CoefficientDistribution::rademacher(),
            CoefficientDistribution::uniform_symmetric(2.0).unwrap(),
            CoefficientDistribution::discrete(vec![-1.0 / 3.0, 0.0, 1.0], vec![1.0; 3]).unwrap(),
            CoefficientDistribution::discrete(vec![-2.0, 5.0], vec![0.7, 0.3]).unwrap(),
            CoefficientDistribution::student_t(5.0).unwrap(),
        ];
        for (k, d) in fams.iter().enumerate() {
            let s = d.standardize().unwrap();
            assert!(s.is_standardized());
            let n = 100_000;
            let m = empirical(&s, n, 10 + k as u64);
            // Second moment about the known mean 0, with its SE from the
            // fourth moment of the same draws.
            let mut rng = StreamKey::new(10 + k as u64, "dist-test", 0).rng(0);
            let (mut m2, mut m4) = (0.0, 0.0);
            for _ in 0..n {
                let x2 = s.sample(&mut rng).powi(2);
                m2 += x2;
                m4 += x2 * x2;
            }
            m2 /= n as f64;
            m4 /= n as f64;
            let m2_se = ((m4 - m2 * m2).max(0.0) / n as f64).sqrt();
            assert!(m.mean().abs() < 4.0 * m.std_error(), "{:?}", d.family());
            assert!((m2 - 1.0).abs() <= 4.0 * m2_se + 1e-12, "{:?}: {m2}", d.family());
            assert!((m.variance() - 1.0).abs() < 0.03, "{:?}: {}", d.family(), m.variance());
        }
    }
}
