//! Monte Carlo persistence probabilities of random polynomials and the
//! power-law fit of their decay in `n`.

use std::ops::RangeInclusive;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::poly_model::{CoefficientDistribution, PolynomialModel, RegularlyVaryingWeight};
use crate::rng::StreamKey;
use crate::root_count::{CertificationPolicy, RootCertifier, Verdict};
use crate::stats::{weighted_line_fit, wilson_interval, Estimate, Z95};

/// Trials per deterministic work unit.
const CHUNK: u64 = 512;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PersistenceEstimate {
    pub n: usize,
    pub trials: u64,
    pub persist_count: u64,
    pub unknown_count: u64,
    pub p_hat: f64,
    pub ci95: (f64, f64),
}

impl PersistenceEstimate {
    fn from_counts(n: usize, trials: u64, persist: u64, unknown: u64) -> Self {
        let usable = trials - unknown;
        let p_hat = if usable == 0 {
            0.0
        } else {
            persist as f64 / usable as f64
        };
        Self {
            n,
            trials,
            persist_count: persist,
            unknown_count: unknown,
            p_hat,
            ci95: wilson_interval(persist, usable, Z95),
        }
    }

    pub fn usable_trials(&self) -> u64 {
        self.trials - self.unknown_count
    }

    pub fn unknown_rate(&self) -> f64 {
        if self.trials == 0 {
            0.0
        } else {
            self.unknown_count as f64 / self.trials as f64
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PersistencePolicy {
    pub certification: CertificationPolicy,
    /// Largest tolerated fraction of unknown verdicts.
    pub max_unknown_rate: f64,
}

impl Default for PersistencePolicy {
    fn default() -> Self {
        Self {
            certification: CertificationPolicy::default(),
            max_unknown_rate: 1e-3,
        }
    }
}

/// Estimate `P(Q_n has no real zero)` with streams keyed by
/// `(master_seed, "poly-persistence", n)`.
pub fn estimate_persistence(
    n: usize,
    weight: &RegularlyVaryingWeight,
    dist: &CoefficientDistribution,
    trials: u64,
    policy: &PersistencePolicy,
    master_seed: u64,
) -> Result<PersistenceEstimate> {
    let key = StreamKey::new(master_seed, "poly-persistence", n as u64);
    estimate_persistence_keyed(n, weight, dist, trials, policy, key)
}

pub fn estimate_persistence_keyed(
    n: usize,
    weight: &RegularlyVaryingWeight,
    dist: &CoefficientDistribution,
    trials: u64,
    policy: &PersistencePolicy,
    key: StreamKey,
) -> Result<PersistenceEstimate> {
    if trials == 0 {
        return Err(invalid("trials", "must be ≥ 1"));
    }
    if n % 2 == 1 {
        return Ok(PersistenceEstimate {
            n,
            trials: 0,
            persist_count: 0,
            unknown_count: 0,
            p_hat: 0.0,
            ci95: (0.0, 0.0),
        });
    }
    let model = PolynomialModel::new(n, *weight, dist.clone())?;
    let chunks = trials.div_ceil(CHUNK);
    let parts: Vec<Result<(u64, u64)>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut cert = RootCertifier::new(n, policy.certification);
            let mut buf = Vec::with_capacity(n + 1);
            let (mut persist, mut unknown) = (0u64, 0u64);
            for t in c * CHUNK..((c + 1) * CHUNK).min(trials) {
                model.sample_into(&mut key.rng(t), &mut buf);
                match cert.has_real_root(&buf) {
                    Ok(r) => match r.verdict {
                        Verdict::NoRealRoot => persist += 1,
                        Verdict::Unknown => unknown += 1,
                        Verdict::HasRealRoot => {}
                    },
                    // The zero polynomial vanishes everywhere.
                    Err(Error::DegenerateInput(_)) => {}
                    Err(e) => return Err(e),
                }
            }
            Ok((persist, unknown))
        })
        .collect();
    let (mut persist, mut unknown) = (0u64, 0u64);
    for p in parts {
        let (a, b) = p?;
        persist += a;
        unknown += b;
    }
    let est = PersistenceEstimate::from_counts(n, trials, persist, unknown);
    let rate = est.unknown_rate();
    if rate > policy.max_unknown_rate {
        return Err(Error::Reliability {
            rate,
            bound: policy.max_unknown_rate,
            partial: Box::new(est),
        });
    }
    Ok(est)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitPoint {
    pub n: usize,
    pub p_hat: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExponentFit {
    pub slope: f64,
    pub intercept: f64,
    pub stderr: f64,
    pub r_squared: f64,
    pub chi2_reduced: f64,
    pub points: Vec<FitPoint>,
}

impl ExponentFit {
    pub fn estimate(&self) -> Estimate {
        Estimate::new(self.slope, self.stderr)
    }
}

/// Weighted least squares of `−ln p̂` on `ln n` with delta-method weights
/// `p̂ N / (1 − p̂)`.
pub fn fit_exponent(estimates: &[PersistenceEstimate]) -> Result<ExponentFit> {
    let mut pts: Vec<&PersistenceEstimate> = estimates
        .iter()
        .filter(|e| e.p_hat > 0.0 && e.p_hat < 1.0 && e.usable_trials() > 0)
        .collect();
    pts.sort_by_key(|e| e.n);
    pts.dedup_by_key(|e| e.n);
    if pts.len() < 3 {
        return Err(Error::InsufficientData {
            usable: pts.len(),
            required: 3,
        });
    }
    let x: Vec<f64> = pts.iter().map(|e| (e.n as f64).ln()).collect();
    let y: Vec<f64> = pts.iter().map(|e| -e.p_hat.ln()).collect();
    let w: Vec<f64> = pts
        .iter()
        .map(|e| e.p_hat * e.usable_trials() as f64 / (1.0 - e.p_hat))
        .collect();
    let f = weighted_line_fit(&x, &y, &w).ok_or(Error::InsufficientData {
        usable: pts.len(),
        required: 3,
    })?;
    Ok(ExponentFit {
        slope: f.slope,
        intercept: -f.intercept,
        stderr: f.slope_stderr,
        r_squared: f.r_squared,
        chi2_reduced: f.chi2_reduced,
        points: pts
            .iter()
            .zip(&w)
            .map(|(e, &weight)| FitPoint {
                n: e.n,
                p_hat: e.p_hat,
                weight,
            })
            .collect(),
    })
}

/// `2(b_α + b_0)` with standard errors added in quadrature.
pub fn predicted_exponent(b_alpha: Estimate, b_zero: Estimate) -> Estimate {
    debug_assert!(b_alpha.value > 0.0 && b_zero.value > 0.0);
    Estimate::new(
        2.0 * (b_alpha.value + b_zero.value),
        2.0 * b_alpha.stderr.hypot(b_zero.stderr),
    )
}

/// Verify that `Σ_{i∈block} √R(i) ξ_i x^i < 0` at every grid point for a
/// sign pattern with `ξ_even ≤ −ρ`, `ξ_odd ∈ [−ηρ, 0]`.
///
/// The block must start and end on even indices, and the weight ratios on
/// the block must lie in `(1−ε, 1+ε)`. Each odd term is paired with halves
/// of its even neighbours; the resulting quadratic is negative definite once
/// `η²(1+ε)² < 1−ε`.
#[allow(clippy::too_many_arguments)]
pub fn negativity_block_certificate(
    rho: f64,
    eta: f64,
    epsilon: f64,
    weight: &RegularlyVaryingWeight,
    xi: &[f64],
    block: RangeInclusive<usize>,
    x_grid: &[f64],
) -> Result<bool> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::Constraint(format!("rho must be positive, got {rho}")));
    }
    if !(0.0..1.0).contains(&eta) {
        return Err(Error::Constraint(format!("eta must lie in [0, 1), got {eta}")));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Constraint(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    let lhs = eta * eta * (1.0 + epsilon).powi(2);
    if lhs >= 1.0 - epsilon {
        return Err(Error::Constraint(format!(
            "η²(1+ε)² = {lhs} is not below 1−ε = {}",
            1.0 - epsilon
        )));
    }
    let (start, end) = (*block.start(), *block.end());
    if start > end || end >= xi.len() {
        return Err(Error::Constraint(format!(
            "block {start}..={end} does not fit a pattern of length {}",
            xi.len()
        )));
    }
    if start % 2 == 1 || end % 2 == 1 {
        return Err(Error::Constraint(format!("block {start}..={end} must start and end on even indices")));
    }
    for i in start..=end {
        let ok = if i % 2 == 0 {
            xi[i] <= -rho
        } else {
            (-eta * rho..=0.0).contains(&xi[i])
        };
        if !ok {
            return Err(Error::Constraint(format!("ξ_{i} = {} violates the sign pattern", xi[i])));
        }
    }
    for i in start..end {
        let q = weight.r(i as u64 + 1) / weight.r(i as u64);
        if !(q > 1.0 - epsilon && q < 1.0 + epsilon) {
            return Err(Error::Constraint(format!("R({})/R({i}) = {q} outside (1−ε, 1+ε)", i + 1)));
        }
    }
    if start > 0 && x_grid.contains(&0.0) {
        return Err(Error::Constraint("x = 0 makes a block starting above index 0 vanish".into()));
    }
    let a: Vec<f64> = (start..=end).map(|i| weight.r(i as u64).sqrt() * xi[i]).collect();
    Ok(x_grid.iter().all(|&x| {
        let mut acc = 0.0;
        for c in a.iter().rev() {
            acc = acc * x + c;
        }
        acc * x.powi(start as i32) < 0.0
    }))
}
