//! Expected number of real zeros of a Gaussian polynomial.
//!
//! With `t = e^{−v}` and the four-fold symmetry `t ↦ −t`, `t ↦ 1/t`,
//! `E N_n = (4/π) ∫_0^∞ ρ(v) dv` where
//! `ρ(v)² = (csch² v − N² csch²(N v)) / 4` and `N = n + 1`.

use crate::error::{invalid, Result};
use crate::quadrature::integrate;

/// `csch² x − 1/x²`, accurate for all `x > 0`.
fn csch2_minus_inv2(x: f64) -> f64 {
    if x < 0.25 {
        let x2 = x * x;
        // Taylor coefficients of csch² x − x⁻² about 0.
        const C: [f64; 7] = [
            -1.0 / 3.0,
            1.0 / 15.0,
            -2.0 / 189.0,
            1.0 / 675.0,
            -2.0 / 10395.0,
            1382.0 / 58_046_625.0,
            -4.0 / 1_403_325.0,
        ];
        let mut acc = 0.0;
        for c in C.iter().rev() {
            acc = acc * x2 + c;
        }
        acc
    } else {
        csch2(x) - 1.0 / (x * x)
    }
}

fn csch2(x: f64) -> f64 {
    let e = (-2.0 * x).exp_m1();
    4.0 * (-2.0 * x).exp() / (e * e)
}

/// Integrand `ρ(v)` in the `v = −ln|t|` variable.
pub fn kac_density_v(n: usize, v: f64) -> f64 {
    let nn = (n + 1) as f64;
    let s2 = if nn * v < 2.0 {
        csch2_minus_inv2(v) - nn * nn * csch2_minus_inv2(nn * v)
    } else {
        csch2(v) - nn * nn * csch2(nn * v)
    };
    0.5 * s2.max(0.0).sqrt()
}

/// `E[N_n]` for i.i.d. standard Gaussian coefficients.
pub fn kac_expected_roots(n: usize) -> Result<f64> {
    if n == 0 {
        return Err(invalid("n", "degree must be ≥ 1"));
    }
    let nn = (n + 1) as f64;
    let mut edges = vec![0.0, 1.0 / nn];
    let mut e = 1.0 / nn;
    while e < 40.0 {
        e = (e * 2.0).min(40.0);
        edges.push(e);
    }
    let mut total = 0.0;
    for w in edges.windows(2) {
        let q = integrate(|v| kac_density_v(n, v), w[0], w[1], 1e-12, 1e-300, 2000)?;
        total += q.value;
    }
    Ok(4.0 / std::f64::consts::PI * total)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Direct evaluation of the Kac integrand from the sums
    /// `A = Σ t^{2i}`, `B = Σ i t^{2i−1}`, `C = Σ i² t^{2i−2}` on `[0, 1]`.
    fn kac_direct(n: usize) -> f64 {
        let f = |t: f64| {
            let (mut a, mut b, mut c) = (0.0, 0.0, 0.0);
            for i in 0..=n {
                let fi = i as f64;
                a += t.powi(2 * i as i32);
                if i >= 1 {
                    b += fi * t.powi(2 * i as i32 - 1);
                    c += fi * fi * t.powi(2 * i as i32 - 2);
                }
            }
            (a * c - b * b).max(0.0).sqrt() / a
        };
        // Split near t = 1 where the integrand peaks.
        let mut edges = vec![0.0, 0.5, 0.8, 0.9];
        let mut g = 0.1;
        while g > 1e-4 {
            g /= 2.0;
            edges.push(1.0 - g);
        }
        edges.push(1.0);
        let mut s = 0.0;
        for w in edges.windows(2) {
            s += integrate(f, w[0], w[1], 1e-12, 1e-300, 4000).unwrap().value;
        }
        4.0 / std::f64::consts::PI * s
    }

    #[test]
    fn linear_has_one_root() {
        assert!((kac_expected_roots(1).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn matches_direct_sums() {
        for n in [2usize, 5, 10, 20] {
            let a = kac_expected_roots(n).unwrap();
            let b = kac_direct(n);
            assert!((a - b).abs() / b < 1e-6, "n={n}: {a} vs {b}");
        }
    }

    #[test]
    fn reference_value_at_fifty() {
        // High-precision value of the same integral.
        let want = 3.128_720_456_782_130_2;
        assert!((kac_expected_roots(50).unwrap() - want).abs() < 1e-9);
    }

    #[test]
    fn series_joins_closed_form() {
        let below = csch2_minus_inv2(0.25 - 1e-12);
        let above = csch2_minus_inv2(0.25 + 1e-12);
        assert!((below - above).abs() < 1e-13, "{below} {above}");
        // csch²(1) = 0.72406166096631046...
        assert!((csch2_minus_inv2(1.0) - (0.724_061_660_966_310_5 - 1.0)).abs() < 1e-14);
    }
}
