//! Companion-matrix eigenvalue oracle.

use nalgebra::{Complex, DMatrix};

use crate::error::{Error, Result};

pub const EIGEN_DEGREE_CAP: usize = 500;

/// Parlett–Reinsch balancing with radix 2 (exact scalings).
fn balance(a: &mut DMatrix<f64>) {
    let n = a.nrows();
    let radix = 2.0f64;
    let sqrdx = radix * radix;
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let mut r = 0.0;
            let mut c = 0.0;
            for j in 0..n {
                if j != i {
                    c += a[(j, i)].abs();
                    r += a[(i, j)].abs();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let mut g = r / radix;
            let mut f = 1.0;
            let s = c + r;
            while c < g {
                f *= radix;
                c *= sqrdx;
            }
            g = r * radix;
            while c > g {
                f /= radix;
                c /= sqrdx;
            }
            if (c + r) / f < 0.95 * s {
                done = false;
                let g = 1.0 / f;
                for j in 0..n {
                    a[(i, j)] *= g;
                }
                for j in 0..n {
                    a[(j, i)] *= f;
                }
            }
        }
    }
}

/// Roots of `Σ c_i x^i` (ascending) as eigenvalues of the balanced
/// companion matrix.
pub fn companion_roots(c: &[f64]) -> Result<Vec<Complex<f64>>> {
    let mut c: Vec<f64> = c.to_vec();
    while c.len() > 1 && *c.last().unwrap() == 0.0 {
        c.pop();
    }
    if c.iter().all(|v| *v == 0.0) {
        return Err(Error::DegenerateInput("zero polynomial".into()));
    }
    let n = c.len() - 1;
    if n > EIGEN_DEGREE_CAP {
        return Err(Error::Capacity {
            degree: n,
            cap: EIGEN_DEGREE_CAP,
        });
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let lead = c[n];
    let mut m = DMatrix::<f64>::zeros(n, n);
    for i in 1..n {
        m[(i, i - 1)] = 1.0;
    }
    for i in 0..n {
        m[(i, n - 1)] = -c[i] / lead;
    }
    balance(&mut m);
    let schur = nalgebra::linalg::Schur::try_new(m, f64::EPSILON, 100 * n.max(10))
        .ok_or_else(|| Error::Accuracy(format!("Schur iteration did not converge at degree {n}")))?;
    Ok(schur.complex_eigenvalues().iter().copied().collect())
}

/// Number of eigenvalues with `|Im λ| < imag_tol`.
pub fn count_real_eigenvalues(c: &[f64], imag_tol: f64) -> Result<usize> {
    Ok(companion_roots(c)?.iter().filter(|z| z.im.abs() < imag_tol).count())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_roots() {
        let mut r: Vec<f64> = companion_roots(&[-6.0, 11.0, -6.0, 1.0])
            .unwrap()
            .iter()
            .map(|z| {
                assert!(z.im.abs() < 1e-10);
                z.re
            })
            .collect();
        r.sort_by(f64::total_cmp);
        for (got, want) in r.iter().zip([1.0, 2.0, 3.0]) {
            assert!((got - want).abs() < 1e-10);
        }
        assert_eq!(count_real_eigenvalues(&[1.0, 0.0, 1.0], 1e-8).unwrap(), 0);
        assert_eq!(count_real_eigenvalues(&[0.0, -1.0, 0.0, 1.0], 1e-8).unwrap(), 3);
    }

    #[test]
    fn balancing_tames_badly_scaled_input() {
        // (x - 1e-3)(x - 1e3)(x + 1)
        let a = 1e-3;
        let b = 1e3;
        let coeffs = [a * b, a * b - a - b, -(a + b) + 1.0, 1.0];
        let roots = companion_roots(&coeffs).unwrap();
        let mut re: Vec<f64> = roots.iter().map(|z| z.re).collect();
        re.sort_by(f64::total_cmp);
        assert!((re[0] + 1.0).abs() < 1e-9);
        assert!((re[1] - a).abs() < 1e-9);
        assert!((re[2] - b).abs() < 1e-7);
    }

    #[test]
    fn capacity() {
        let mut c = vec![0.0; 502];
        c[501] = 1.0;
        c[0] = 1.0;
        assert!(matches!(companion_roots(&c), Err(Error::Capacity { .. })));
    }
}
