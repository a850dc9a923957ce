//! Finite block sums `Σ_{i∈I_ℓ} R(i) e^{∓itτ}` and their convergence to the
//! limiting integrals.

use serde::Serialize;

use super::{LimitCovariance, Variant};
use crate::error::{invalid, Error, Result};
use crate::poly_model::RegularlyVaryingWeight;
use crate::stats::CompensatedSum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// Indices near 0: `I_ℓ = [n^δ M^{ℓ−1}, n^δ M^ℓ)`.
    Minus,
    /// Indices near `n`: `I_ℓ = (n − n^δ M^ℓ, n − n^δ M^{ℓ−1}]`.
    Plus,
}

/// `mantissa · e^{log_scale}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScaledSum {
    pub mantissa: f64,
    pub log_scale: f64,
}

impl ScaledSum {
    pub fn ln(&self) -> f64 {
        self.mantissa.ln() + self.log_scale
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FiniteBlockSum {
    pub n: u64,
    pub r: i32,
    pub l: i32,
    pub m: f64,
    pub delta: f64,
    pub weight: RegularlyVaryingWeight,
}

impl FiniteBlockSum {
    pub fn new(n: u64, r: i32, l: i32, m: f64, delta: f64, weight: RegularlyVaryingWeight) -> Result<Self> {
        if n < 2 {
            return Err(invalid("n", "must be ≥ 2"));
        }
        if !(m > 1.0 && m.is_finite()) {
            return Err(invalid("M", format!("must exceed 1, got {m}")));
        }
        if !(delta > 0.0 && delta < 0.5) {
            return Err(invalid("delta", format!("must lie in (0, 1/2), got {delta}")));
        }
        let fb = Self {
            n,
            r,
            l,
            m,
            delta,
            weight,
        };
        let (lo, hi) = fb.offsets();
        if lo > hi {
            return Err(Error::Domain(format!("block ℓ = {l} is empty at n = {n}")));
        }
        if hi > n {
            return Err(Error::Domain(format!("block ℓ = {l} reaches past degree n = {n}")));
        }
        Ok(fb)
    }

    /// Same configuration with block index `ℓ`.
    pub fn with_block(&self, l: i32) -> Result<Self> {
        Self::new(self.n, self.r, l, self.m, self.delta, self.weight)
    }

    /// `τ = 1/(n^δ M^{r−δ})`.
    pub fn tau(&self) -> f64 {
        (-(self.delta * (self.n as f64).ln() + (self.r as f64 - self.delta) * self.m.ln())).exp()
    }

    fn edge(&self, k: i32) -> f64 {
        (self.delta * (self.n as f64).ln() + k as f64 * self.m.ln()).exp()
    }

    /// Inclusive range of distances `j` from the branch's end: `j = i` on
    /// the minus side, `j = n − i` on the plus side.
    pub fn offsets(&self) -> (u64, u64) {
        // Edges that are integers up to rounding are taken as exact.
        let snap = |x: f64| {
            let r = x.round();
            if (x - r).abs() <= 1e-9 * x.max(1.0) {
                r
            } else {
                x.ceil()
            }
        };
        let a = snap(self.edge(self.l - 1)) as u64;
        let b = snap(self.edge(self.l)) as u64;
        (a, b.saturating_sub(1))
    }

    pub fn block_len(&self) -> u64 {
        let (a, b) = self.offsets();
        b + 1 - a
    }

    /// `L(n^δ M^r)`, the slowly varying factor of the normalization.
    fn l_at_block(&self) -> f64 {
        self.weight.slowly_varying().eval(self.edge(self.r))
    }

    /// The limit integral the normalized sum converges to.
    pub fn limit(&self, branch: Branch) -> Result<LimitCovariance> {
        let alpha = match branch {
            Branch::Minus => self.weight.alpha(),
            Branch::Plus => 0.0,
        };
        let s = self.l - self.r;
        let delta = self.delta;
        LimitCovariance::new(s, self.m, delta, alpha, Variant::UpperBoundH)
    }
}

/// Exact block sum. The plus branch is returned as
/// `e^{ntτ} Σ_j R(n−j) e^{−jtτ}` with the exponential kept in `log_scale`.
pub fn h_finite_sum(fb: &FiniteBlockSum, t: f64, branch: Branch) -> Result<ScaledSum> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(invalid("t", format!("must be positive, got {t}")));
    }
    let step = t * fb.tau();
    let (lo, hi) = fb.offsets();
    let mut acc = CompensatedSum::new();
    let peak = match branch {
        Branch::Minus => (fb.weight.alpha().max(0.0) + 1.0) / step,
        Branch::Plus => 0.0,
    };
    for j in lo..=hi {
        let i = match branch {
            Branch::Minus => j,
            Branch::Plus => fb.n - j,
        };
        let term = fb.weight.r(i) * (-(j as f64) * step).exp();
        if term == 0.0 && j as f64 > peak {
            break;
        }
        acc.add(term);
    }
    let mantissa = acc.value();
    if !(mantissa > 0.0) {
        return Err(Error::Accuracy(format!(
            "block sum underflows at t = {t} for ℓ = {}",
            fb.l
        )));
    }
    let log_scale = match branch {
        Branch::Minus => 0.0,
        Branch::Plus => fb.n as f64 * step,
    };
    Ok(ScaledSum { mantissa, log_scale })
}

/// `|ratio − 1|` where the ratio is
/// `τ^{α+1} h^{(−)}/(L(n^δ M^r) h_{ℓ−r,M,α}(t))` on the minus branch and
/// `τ h^{(+)}/(R(n) e^{ntτ} h_{ℓ−r,M,0}(t))` on the plus branch.
pub fn convergence_ratio(fb: &FiniteBlockSum, t: f64, branch: Branch) -> Result<f64> {
    if (fb.l - fb.r).abs() > 5 {
        return Err(invalid("l", "block separation |ℓ − r| must be ≤ 5"));
    }
    let sum = h_finite_sum(fb, t, branch)?;
    let limit = fb.limit(branch)?.h(t)?;
    let tau = fb.tau();
    let ratio = match branch {
        Branch::Minus => tau.powf(fb.weight.alpha() + 1.0) * sum.mantissa / (fb.l_at_block() * limit),
        Branch::Plus => tau * sum.mantissa / (fb.weight.r(fb.n) * limit),
    };
    Ok((ratio - 1.0).abs())
}
