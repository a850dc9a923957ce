//! Circulant-embedding sampler for stationary covariances on a uniform grid.

use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{invalid, Error, Result};

/// Largest embedding length tried before giving up.
const MAX_EMBED: usize = 1 << 22;

/// Negative eigenvalues down to this fraction of the largest are clamped.
const NEG_TOL: f64 = 1e-10;

pub struct CirculantSampler {
    dim: usize,
    scale: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for CirculantSampler {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CirculantSampler")
            .field("dim", &self.dim)
            .field("embedding", &self.scale.len())
            .finish()
    }
}

impl CirculantSampler {
    /// `lag_cov(k)` is the covariance at lag `k` grid steps. The embedding
    /// doubles until the circulant spectrum is nonnegative.
    pub fn new(dim: usize, lag_cov: impl Fn(usize) -> f64) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("dim", "grid must have at least one point"));
        }
        let mut n = (2 * (dim - 1)).max(1).next_power_of_two();
        let mut planner = FftPlanner::new();
        loop {
            let fft = planner.plan_fft_forward(n);
            let mut buf: Vec<Complex<f64>> = (0..n)
                .map(|k| Complex::new(lag_cov(k.min(n - k)), 0.0))
                .collect();
            fft.process(&mut buf);
            let max = buf.iter().map(|c| c.re).fold(f64::NEG_INFINITY, f64::max);
            let min = buf.iter().map(|c| c.re).fold(f64::INFINITY, f64::min);
            if min >= -NEG_TOL * max {
                let scale = buf.iter().map(|c| (c.re.max(0.0) / n as f64).sqrt()).collect();
                return Ok(Self { dim, scale, fft });
            }
            if n >= MAX_EMBED {
                return Err(Error::Conditioning { min_eigenvalue: min });
            }
            n *= 2;
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn embedding_len(&self) -> usize {
        self.scale.len()
    }

    /// Two independent paths from one transform.
    pub fn sample_pair<R: Rng + ?Sized>(&self, rng: &mut R, a: &mut Vec<f64>, b: &mut Vec<f64>) {
        let mut buf: Vec<Complex<f64>> = self
            .scale
            .iter()
            .map(|&s| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex::new(s * re, s * im)
            })
            .collect();
        self.fft.process(&mut buf);
        a.clear();
        b.clear();
        a.extend(buf[..self.dim].iter().map(|c| c.re));
        b.extend(buf[..self.dim].iter().map(|c| c.im));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::StreamKey;
    use crate::stats::Moments;

    #[test]
    fn ar1_kernel_embeds_at_minimal_size() {
        let s = CirculantSampler::new(17, |k| 0.8f64.powi(k as i32)).unwrap();
        assert_eq!(s.embedding_len(), 32);
    }

    #[test]
    fn lag_covariance_reproduced() {
        let s = CirculantSampler::new(9, |k| 0.6f64.powi(k as i32)).unwrap();
        let key = StreamKey::new(1, "circulant-test", 0);
        let mut lag0 = Moments::default();
        let mut lag3 = Moments::default();
        let (mut a, mut b) = (Vec::new(), Vec::new());
        for t in 0..20_000 {
            s.sample_pair(&mut key.rng(t), &mut a, &mut b);
            for p in [&a, &b] {
                lag0.push(p[4] * p[4]);
                lag3.push(p[2] * p[5]);
            }
        }
        assert!((lag0.mean() - 1.0).abs() < 4.0 * lag0.std_error());
        assert!((lag3.mean() - 0.216).abs() < 4.0 * lag3.std_error());
    }
}
