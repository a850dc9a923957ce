//! Dense Gaussian sampling from a packed row-major Cholesky factor.
//!
//! Rows are contiguous, so both the factorization (Cholesky–Banachiewicz)
//! and the sequential sampling `y_k = Σ_{j≤k} L_kj z_j` run on dot products
//! of contiguous slices. Sequential sampling lets persistence trials stop at
//! the first grid point above the level.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Error, Result};

/// Diagonal jitter tried in order, relative to the largest diagonal entry.
pub const JITTER_LADDER: [f64; 6] = [0.0, 1e-12, 1e-11, 1e-10, 1e-9, 1e-8];

fn row_start(i: usize) -> usize {
    i * (i + 1) / 2
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    // Four accumulators let the compiler vectorize.
    let mut acc = [0.0; 4];
    let chunks = a.len() / 4;
    for k in 0..chunks {
        for l in 0..4 {
            acc[l] += a[4 * k + l] * b[4 * k + l];
        }
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for k in 4 * chunks..a.len() {
        s += a[k] * b[k];
    }
    s
}

#[derive(Debug, Clone)]
pub struct DenseSampler {
    dim: usize,
    factor: Vec<f64>,
    jitter: f64,
}

impl DenseSampler {
    /// Factor the covariance `cov(i, j)` for `0 ≤ j ≤ i < dim`.
    pub fn from_fn(dim: usize, cov: impl Fn(usize, usize) -> f64) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("dim", "covariance must have at least one point"));
        }
        let mut packed = vec![0.0; row_start(dim)];
        let mut scale = 0.0f64;
        for i in 0..dim {
            for j in 0..=i {
                let v = cov(i, j);
                if !v.is_finite() {
                    return Err(invalid("cov", format!("entry ({i}, {j}) is {v}")));
                }
                packed[row_start(i) + j] = v;
            }
            scale = scale.max(packed[row_start(i) + i].abs());
        }
        for &rel in &JITTER_LADDER {
            let jitter = rel * scale;
            if let Some(factor) = cholesky_packed(&packed, dim, jitter) {
                return Ok(Self { dim, factor, jitter });
            }
        }
        Err(Error::Conditioning {
            min_eigenvalue: min_eigenvalue(&packed, dim),
        })
    }

    pub fn from_matrix(m: &DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(invalid("cov", "matrix must be square"));
        }
        for i in 0..m.nrows() {
            for j in 0..i {
                if (m[(i, j)] - m[(j, i)]).abs() > 1e-12 * (m[(i, i)].abs() + m[(j, j)].abs()) {
                    return Err(invalid("cov", format!("matrix is not symmetric at ({i}, {j})")));
                }
            }
        }
        Self::from_fn(m.nrows(), |i, j| m[(i, j)])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Absolute diagonal jitter that made the factorization succeed.
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    /// Draw a full path into `out`.
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut Vec<f64>) {
        let mut z = Vec::with_capacity(self.dim);
        out.clear();
        for i in 0..self.dim {
            z.push(rng.sample::<f64, _>(StandardNormal));
            let row = &self.factor[row_start(i)..row_start(i) + i + 1];
            out.push(dot(row, &z));
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let mut out = Vec::new();
        self.sample_into(rng, &mut out);
        out
    }

    /// Whether the first `points` coordinates all stay `≤ level`. Stops at
    /// the first exceedance; `z` is scratch space.
    pub fn stays_below<R: Rng + ?Sized>(&self, rng: &mut R, points: usize, level: f64, z: &mut Vec<f64>) -> bool {
        debug_assert!(points <= self.dim);
        z.clear();
        for i in 0..points {
            z.push(rng.sample::<f64, _>(StandardNormal));
            let row = &self.factor[row_start(i)..row_start(i) + i + 1];
            if dot(row, z) > level {
                return false;
            }
        }
        true
    }
}

fn cholesky_packed(a: &[f64], dim: usize, jitter: f64) -> Option<Vec<f64>> {
    let mut l = vec![0.0; a.len()];
    for i in 0..dim {
        let ri = row_start(i);
        for j in 0..=i {
            let rj = row_start(j);
            let s = a[ri + j] - dot(&l[ri..ri + j], &l[rj..rj + j]);
            if i == j {
                let d = s + jitter;
                if !(d > 0.0) {
                    return None;
                }
                l[ri + i] = d.sqrt();
            } else {
                l[ri + j] = s / l[rj + j];
            }
        }
    }
    Some(l)
}

fn min_eigenvalue(packed: &[f64], dim: usize) -> f64 {
    let m = DMatrix::from_fn(dim, dim, |i, j| {
        let (a, b) = if i >= j { (i, j) } else { (j, i) };
        packed[row_start(a) + b]
    });
    SymmetricEigen::new(m).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}
