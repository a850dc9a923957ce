//! Stationary sech-covariance Gaussian processes, their persistence
//! probabilities on `[0, T]`, and the exponent `b_α`.

mod circulant;
mod dense;

use rayon::prelude::*;
use serde::Serialize;

pub use circulant::CirculantSampler;
pub use dense::{DenseSampler, JITTER_LADDER};

use crate::error::{invalid, Error, Result};
use crate::limit_cov::LimitCovariance;
use crate::rng::{StreamKey, TrialRng};
use crate::stats::{ks_two_sample, weighted_line_fit, Proportion};

const CHUNK: u64 = 1024;

/// `ln cosh x` without overflow.
fn ln_cosh(x: f64) -> f64 {
    let a = x.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

/// `sech(τ/2)^{α+1}`. Returns NaN for `α ≤ −1`.
pub fn cov_sech(tau: f64, alpha: f64) -> f64 {
    if !(alpha > -1.0) {
        return f64::NAN;
    }
    (-(alpha + 1.0) * ln_cosh(0.5 * tau)).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StationaryKernel {
    alpha: f64,
}

impl StationaryKernel {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > -1.0) {
            return Err(invalid("alpha", format!("must be finite and > -1, got {alpha}")));
        }
        Ok(Self { alpha })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn cov(&self, tau: f64) -> f64 {
        cov_sech(tau, self.alpha)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GpGrid {
    pub horizon: f64,
    pub dt: f64,
    pub points: usize,
}

impl GpGrid {
    /// `T/dt + 1` equispaced times; `T` must be a multiple of `dt` up to
    /// rounding.
    pub fn new(horizon: f64, dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(invalid("dt", format!("must be positive, got {dt}")));
        }
        if !(horizon >= 0.0 && horizon.is_finite()) {
            return Err(invalid("horizon", format!("must be nonnegative, got {horizon}")));
        }
        let steps = horizon / dt;
        let k = steps.round();
        if (steps - k).abs() > 1e-6 * k.max(1.0) {
            return Err(invalid("horizon", format!("{horizon} is not a multiple of dt = {dt}")));
        }
        Ok(Self {
            horizon,
            dt,
            points: k as usize + 1,
        })
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.points).map(|k| k as f64 * self.dt).collect()
    }
}

/// Dense sampler for `kernel` on `grid`.
pub fn dense_kernel_sampler(kernel: &StationaryKernel, grid: &GpGrid) -> Result<DenseSampler> {
    let lags: Vec<f64> = (0..grid.points).map(|k| kernel.cov(k as f64 * grid.dt)).collect();
    DenseSampler::from_fn(grid.points, |i, j| lags[i - j])
}

pub fn circulant_kernel_sampler(kernel: &StationaryKernel, grid: &GpGrid) -> Result<CirculantSampler> {
    let dt = grid.dt;
    CirculantSampler::new(grid.points, |k| kernel.cov(k as f64 * dt))
}

/// Draw one path of the sech process on `grid`.
pub fn sample_gp(kernel: &StationaryKernel, grid: &GpGrid, rng: &mut TrialRng) -> Result<Vec<f64>> {
    Ok(dense_kernel_sampler(kernel, grid)?.sample(rng))
}

/// Fraction of paths whose first `points` coordinates stay `≤ level`.
pub fn gp_persistence(
    sampler: &DenseSampler,
    points: usize,
    level: f64,
    trials: u64,
    key: &StreamKey,
) -> Result<Proportion> {
    if trials == 0 {
        return Err(invalid("trials", "must be ≥ 1"));
    }
    if points == 0 || points > sampler.dim() {
        return Err(invalid("points", format!("must lie in 1..={}, got {points}", sampler.dim())));
    }
    if level == f64::INFINITY {
        return Ok(Proportion::new(trials, trials));
    }
    let chunks = trials.div_ceil(CHUNK);
    let hits: u64 = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut z = Vec::with_capacity(points);
            (c * CHUNK..((c + 1) * CHUNK).min(trials))
                .filter(|&t| sampler.stays_below(&mut key.rng(t), points, level, &mut z))
                .count() as u64
        })
        .collect::<Vec<_>>()
        .into_iter()
        .sum();
    Ok(Proportion::new(hits, trials))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvePoint {
    pub horizon: f64,
    pub estimate: Proportion,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PersistenceCurve {
    pub alpha: f64,
    pub dt: f64,
    pub trials: u64,
    pub points: Vec<CurvePoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BAlphaFit {
    pub b_hat: f64,
    pub stderr: f64,
    pub intercept: f64,
    pub chi2_reduced: f64,
    pub jitter: f64,
    pub curve: PersistenceCurve,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BAlphaEstimate {
    pub b_hat: f64,
    pub stderr: f64,
    pub coarse: BAlphaFit,
    pub refined: BAlphaFit,
    /// `|b̂(dt) − b̂(dt/2)|`.
    pub shift: f64,
    pub combined_stderr: f64,
    pub dt_stable: bool,
}

/// Slope of `−ln P̂(T)` against `T` at a single grid step.
pub fn fit_b_alpha(alpha: f64, t_list: &[f64], dt: f64, trials: u64, key: &StreamKey) -> Result<BAlphaFit> {
    if t_list.len() < 3 {
        return Err(invalid("t_list", format!("need at least 3 horizons, got {}", t_list.len())));
    }
    if t_list.windows(2).any(|w| !(w[1] > w[0])) || !(t_list[0] > 0.0) {
        return Err(invalid("t_list", "horizons must be positive and strictly increasing"));
    }
    let kernel = StationaryKernel::new(alpha)?;
    let grids: Vec<GpGrid> = t_list.iter().map(|&t| GpGrid::new(t, dt)).collect::<Result<_>>()?;
    // Every horizon uses a prefix of the longest grid's factor.
    let sampler = dense_kernel_sampler(&kernel, grids.last().unwrap())?;
    let mut points = Vec::with_capacity(grids.len());
    for (k, g) in grids.iter().enumerate() {
        let est = gp_persistence(&sampler, g.points, 0.0, trials, &key.child(k as u64))?;
        if est.successes == 0 {
            return Err(Error::InsufficientTrials { horizon: g.horizon });
        }
        points.push(CurvePoint {
            horizon: g.horizon,
            estimate: est,
        });
    }
    let x: Vec<f64> = points.iter().map(|p| p.horizon).collect();
    let y: Vec<f64> = points.iter().map(|p| -p.estimate.p_hat.ln()).collect();
    let w: Vec<f64> = points
        .iter()
        .map(|p| {
            let q = p.estimate.p_hat;
            if q >= 1.0 {
                p.estimate.trials as f64
            } else {
                q * p.estimate.trials as f64 / (1.0 - q)
            }
        })
        .collect();
    let f = weighted_line_fit(&x, &y, &w).ok_or(Error::InsufficientData {
        usable: points.len(),
        required: 3,
    })?;
    Ok(BAlphaFit {
        b_hat: f.slope,
        stderr: f.slope_stderr,
        intercept: f.intercept,
        chi2_reduced: f.chi2_reduced,
        jitter: sampler.jitter(),
        curve: PersistenceCurve {
            alpha,
            dt,
            trials,
            points,
        },
    })
}

/// `b̂_α` at `dt`, with a stability re-run at `dt/2` on independent
/// streams.
pub fn estimate_b_alpha(alpha: f64, t_list: &[f64], dt: f64, trials: u64, master_seed: u64) -> Result<BAlphaEstimate> {
    let key = StreamKey::new(master_seed, "gp-exponent", alpha.to_bits());
    let coarse = fit_b_alpha(alpha, t_list, dt, trials, &key.child(0))?;
    let refined = fit_b_alpha(alpha, t_list, dt / 2.0, trials, &key.child(1))?;
    let shift = (coarse.b_hat - refined.b_hat).abs();
    let combined_stderr = coarse.stderr.hypot(refined.stderr);
    Ok(BAlphaEstimate {
        b_hat: coarse.b_hat,
        stderr: coarse.stderr,
        dt_stable: shift < combined_stderr,
        shift,
        combined_stderr,
        coarse,
        refined,
    })
}

/// Limiting block process with correlation
/// `h_s(t₁+t₂)/√(h_s(2t₁) h_s(2t₂))` on the given times.
#[derive(Debug, Clone)]
pub struct LimitBlockProcess {
    times: Vec<f64>,
    sampler: DenseSampler,
}

impl LimitBlockProcess {
    pub fn new(lc: &LimitCovariance, times: &[f64]) -> Result<Self> {
        if times.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
            return Err(invalid("times", "must be positive and finite"));
        }
        let diag: Vec<f64> = times.iter().map(|&t| lc.h(2.0 * t)).collect::<Result<_>>()?;
        let mut entries = vec![0.0; times.len() * (times.len() + 1) / 2];
        let mut k = 0;
        for i in 0..times.len() {
            for j in 0..=i {
                entries[k] = if i == j {
                    1.0
                } else {
                    lc.h(times[i] + times[j])? / (diag[i] * diag[j]).sqrt()
                };
                k += 1;
            }
        }
        let sampler = DenseSampler::from_fn(times.len(), |i, j| entries[i * (i + 1) / 2 + j])?;
        Ok(Self {
            times: times.to_vec(),
            sampler,
        })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn sampler(&self) -> &DenseSampler {
        &self.sampler
    }

    pub fn sample(&self, rng: &mut TrialRng) -> Vec<f64> {
        self.sampler.sample(rng)
    }
}

pub fn sample_limit_block_process(lc: &LimitCovariance, times: &[f64], rng: &mut TrialRng) -> Result<Vec<f64>> {
    Ok(LimitBlockProcess::new(lc, times)?.sample(rng))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FastPathAgreement {
    pub ks_statistic: f64,
    pub p_value: f64,
    pub embedding_len: usize,
    pub agrees: bool,
}

/// Two-sample KS test between path maxima from the dense and circulant
/// samplers; agreement means `p > 0.01`.
pub fn fast_path_agreement(
    kernel: &StationaryKernel,
    grid: &GpGrid,
    trials: u64,
    key: &StreamKey,
) -> Result<FastPathAgreement> {
    let dense = dense_kernel_sampler(kernel, grid)?;
    let circ = circulant_kernel_sampler(kernel, grid)?;
    let max_of = |p: &[f64]| p.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let dkey = key.child(0);
    let a: Vec<f64> = (0..trials).map(|t| max_of(&dense.sample(&mut dkey.rng(t)))).collect();
    let ckey = key.child(1);
    let mut b = Vec::with_capacity(trials as usize);
    let (mut p, mut q) = (Vec::new(), Vec::new());
    for t in 0..trials.div_ceil(2) {
        circ.sample_pair(&mut ckey.rng(t), &mut p, &mut q);
        b.push(max_of(&p));
        if (b.len() as u64) < trials {
            b.push(max_of(&q));
        }
    }
    let (d, pv) = ks_two_sample(&a, &b);
    Ok(FastPathAgreement {
        ks_statistic: d,
        p_value: pv,
        embedding_len: circ.embedding_len(),
        agrees: pv > 0.01,
    })
}
