//! Monte Carlo checks of Slepian ordering and of the chaining maximal
//! inequality, plus the block-separation decay of the covariance sums.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use super::finite::{h_finite_sum, Branch, FiniteBlockSum};
use crate::error::{invalid, Error, Result};
use crate::gp_engine::{gp_persistence, DenseSampler};
use crate::rng::{StreamKey, TrialRng};
use crate::stats::{Moments, Proportion};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlepianReport {
    pub p_hi: Proportion,
    pub p_lo: Proportion,
    pub joint_se: f64,
    /// `p_hi − p_lo + 3·joint_se`; negative means a violation.
    pub margin: f64,
    pub holds: bool,
}

/// Compare `P(sup < 0)` under two covariances with equal diagonals and
/// `cov_hi ≥ cov_lo` entrywise.
pub fn slepian_order_check(
    cov_hi: &DMatrix<f64>,
    cov_lo: &DMatrix<f64>,
    trials: u64,
    key: &StreamKey,
) -> Result<SlepianReport> {
    if cov_hi.shape() != cov_lo.shape() || cov_hi.nrows() != cov_hi.ncols() {
        return Err(Error::Precondition("covariances must be square and of equal size".into()));
    }
    let m = cov_hi.nrows();
    for i in 0..m {
        if (cov_hi[(i, i)] - cov_lo[(i, i)]).abs() > 1e-12 {
            return Err(Error::Precondition(format!("diagonals differ at index {i}")));
        }
        for j in 0..m {
            if cov_hi[(i, j)] < cov_lo[(i, j)] - 1e-15 {
                return Err(Error::Precondition(format!(
                    "cov_hi < cov_lo at ({i}, {j}): {} < {}",
                    cov_hi[(i, j)],
                    cov_lo[(i, j)]
                )));
            }
        }
    }
    let hi = DenseSampler::from_matrix(cov_hi)?;
    let lo = DenseSampler::from_matrix(cov_lo)?;
    let p_hi = gp_persistence(&hi, m, 0.0, trials, &key.child(0))?;
    let p_lo = gp_persistence(&lo, m, 0.0, trials, &key.child(1))?;
    let joint_se = p_hi.std_error().hypot(p_lo.std_error());
    let margin = p_hi.p_hat - p_lo.p_hat + 3.0 * joint_se;
    Ok(SlepianReport {
        p_hi,
        p_lo,
        joint_se,
        margin,
        holds: margin >= 0.0,
    })
}

/// `Σ_{q≥1} q⁴ 2^{q(1−β)}`, finite for `β > 1`.
fn dyadic_series(beta: f64) -> f64 {
    let mut s = 0.0;
    for q in 1..10_000 {
        let term = (q as f64).powi(4) * ((1.0 - beta) * q as f64).exp2();
        s += term;
        if term < 1e-17 * s {
            break;
        }
    }
    s
}

/// Constant `K` in `P(sup|W| > δ) ≤ K (γ₁ + γ₂) / δ²` on an interval of
/// length `span`.
///
/// Dyadic chaining: `sup|W| ≤ |W(T₁)| + Σ_q max_k |ΔW_{q,k}|` over levels
/// with `2^q` increments of length `span/2^q`. Giving half of `δ` to
/// `W(T₁)` and `δ·3/(π² q²)` to level `q`, Chebyshev and a union bound give
/// `4γ₁/δ² + (π⁴/9) span^β Σ_q q⁴ 2^{q(1−β)} γ₂/δ²`.
pub fn chaining_constant(beta: f64, span: f64) -> Result<f64> {
    if !(beta > 1.0 && beta.is_finite()) {
        return Err(invalid("beta", format!("chaining needs β > 1, got {beta}")));
    }
    let pi4 = std::f64::consts::PI.powi(4);
    Ok(4.0f64.max(pi4 / 9.0 * span.powf(beta) * dyadic_series(beta)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MaximalReport {
    pub second_moment: f64,
    pub second_moment_se: f64,
    /// Largest `(E(ΔW)² − γ₂|Δt|^β)/SE` over the probed lags.
    pub worst_increment_z: f64,
    pub constant_k: f64,
    pub exceed: Proportion,
    pub bound: f64,
    pub margin: f64,
    pub holds: bool,
}

/// Empirical check of `P(sup|W| > δ) ≤ K(γ₁+γ₂)/δ²` for paths on `times`.
///
/// The moment hypotheses `E W(T₁)² ≤ γ₁` and
/// `E(W(t)−W(s))² ≤ γ₂|t−s|^β` are verified first, within 3 SE.
#[allow(clippy::too_many_arguments)]
pub fn maximal_inequality_check<F>(
    sampler: F,
    times: &[f64],
    gamma1: f64,
    gamma2: f64,
    beta: f64,
    delta_level: f64,
    trials: u64,
    key: &StreamKey,
) -> Result<MaximalReport>
where
    F: Fn(&mut TrialRng, &mut Vec<f64>) + Sync,
{
    if times.len() < 2 || times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(invalid("times", "need at least two increasing times"));
    }
    if trials < 2 {
        return Err(invalid("trials", "need at least two paths"));
    }
    if !(delta_level > 0.0) {
        return Err(invalid("delta_level", "must be positive"));
    }
    let m = times.len();
    let lags: Vec<usize> = {
        let mut v = vec![1, m / 4, m / 2, m - 1];
        v.retain(|&k| k >= 1);
        v.dedup();
        v
    };
    const CHUNK: u64 = 1024;
    let parts: Vec<(Moments, Vec<Moments>, u64)> = (0..trials.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut first = Moments::default();
            let mut incs = vec![Moments::default(); lags.len()];
            let mut exceed = 0u64;
            let mut path = Vec::with_capacity(m);
            for t in c * CHUNK..((c + 1) * CHUNK).min(trials) {
                sampler(&mut key.rng(t), &mut path);
                first.push(path[0] * path[0]);
                for (mom, &k) in incs.iter_mut().zip(&lags) {
                    let d = path[k] - path[0];
                    mom.push(d * d);
                }
                if path.iter().any(|v| v.abs() > delta_level) {
                    exceed += 1;
                }
            }
            (first, incs, exceed)
        })
        .collect();
    let mut first = Moments::default();
    let mut incs = vec![Moments::default(); lags.len()];
    let mut exceed = 0u64;
    for (f, i, e) in &parts {
        first.merge(f);
        for (a, b) in incs.iter_mut().zip(i) {
            a.merge(b);
        }
        exceed += e;
    }
    if first.mean() > gamma1 + 3.0 * first.std_error() {
        return Err(Error::Precondition(format!(
            "E W(T₁)² ≈ {} exceeds γ₁ = {gamma1}",
            first.mean()
        )));
    }
    let mut worst = f64::NEG_INFINITY;
    for (mom, &k) in incs.iter().zip(&lags) {
        let allowed = gamma2 * (times[k] - times[0]).powf(beta);
        let se = mom.std_error();
        let excess = mom.mean() - allowed;
        let z = if se > 0.0 {
            excess / se
        } else if excess > 0.0 {
            f64::INFINITY
        } else {
            0.0
        };
        worst = worst.max(z);
        if excess > 3.0 * se {
            return Err(Error::Precondition(format!(
                "E(ΔW)² ≈ {} exceeds γ₂|Δt|^β = {allowed} at lag {k}",
                mom.mean()
            )));
        }
    }
    let constant_k = chaining_constant(beta, times[m - 1] - times[0])?;
    let bound = constant_k * (gamma1 + gamma2) / (delta_level * delta_level);
    let exceed = Proportion::new(exceed, trials);
    let margin = bound - exceed.p_hat;
    Ok(MaximalReport {
        second_moment: first.mean(),
        second_moment_se: first.std_error(),
        worst_increment_z: worst,
        constant_k,
        exceed,
        bound,
        margin,
        holds: margin >= 0.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayRow {
    pub r: i32,
    pub l: i32,
    pub t: f64,
    /// `h^{(−),ℓ}(2t) / h^{(−),r}(2t)`.
    pub ratio: f64,
    /// `M^{−(α+1−3δ)|ℓ−r| + (α+3)δ}`.
    pub bound: f64,
    pub holds: bool,
}

/// Second-moment ratio of block `ℓ` to block `r` on the minus branch,
/// against the separation bound.
pub fn separation_decay(base: &FiniteBlockSum, t: f64, blocks: &[i32]) -> Result<Vec<DecayRow>> {
    let own = h_finite_sum(&base.with_block(base.r)?, 2.0 * t, Branch::Minus)?.mantissa;
    let alpha = base.weight.alpha();
    blocks
        .iter()
        .map(|&l| {
            let fb = base.with_block(l)?;
            let ratio = h_finite_sum(&fb, 2.0 * t, Branch::Minus).map_or(0.0, |s| s.mantissa / own);
            let sep = (l - base.r).abs() as f64;
            let bound = base
                .m
                .powf(-(alpha + 1.0 - 3.0 * base.delta) * sep + (alpha + 3.0) * base.delta);
            Ok(DecayRow {
                r: base.r,
                l,
                t,
                ratio,
                bound,
                holds: ratio <= bound,
            })
        })
        .collect()
}
