//! Certified decisions about real zeros of sampled polynomials.
//!
//! The real line is covered by four maps onto `[0, 1]`: `x`, `−x`, `1/y`
//! and `−1/y`. On each piece a sign scan over a `u = ln x` grid looks for a
//! witness; gaps between grid points are then closed by Taylor enclosures
//! with bisection. Exhausted budgets fall back to exact Sturm counting and
//! then to the companion-matrix oracle.

mod companion;
mod enclosure;
mod kac;
mod sturm;

pub use companion::{companion_roots, count_real_eigenvalues, EIGEN_DEGREE_CAP};
pub use kac::{kac_density_v, kac_expected_roots};
pub use sturm::{count_real_roots_sturm, rational_coefficients, squarefree_part, STURM_DEGREE_CAP};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::poly_model::{horner, PolynomialSample};
use enclosure::{enclose, Branch, Scratch};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    NoRealRoot,
    HasRealRoot,
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Certification {
    GridSignChange,
    IntervalCertified,
    SturmExact,
    EigenvalueOracle,
    /// Budget exhausted with no applicable fallback.
    None,
}

impl Certification {
    pub fn name(self) -> &'static str {
        match self {
            Self::GridSignChange => "grid_sign_change",
            Self::IntervalCertified => "interval_certified",
            Self::SturmExact => "sturm_exact",
            Self::EigenvalueOracle => "eigenvalue_oracle",
            Self::None => "none",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RootCountResult {
    pub verdict: Verdict,
    pub count: Option<usize>,
    pub certification: Certification,
}

impl RootCountResult {
    fn has_root(c: Certification) -> Self {
        Self {
            verdict: Verdict::HasRealRoot,
            count: None,
            certification: c,
        }
    }

    fn counted(count: usize, c: Certification) -> Self {
        Self {
            verdict: if count == 0 {
                Verdict::NoRealRoot
            } else {
                Verdict::HasRealRoot
            },
            count: Some(count),
            certification: c,
        }
    }

    fn unknown() -> Self {
        Self {
            verdict: Verdict::Unknown,
            count: None,
            certification: Certification::None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CertificationPolicy {
    /// `u_max = ln n + u_max_extra`.
    pub u_max_extra: f64,
    /// Uniform spacing `1/(uniform_divisor·n)` for `|u| ≤ ln n / n`.
    pub uniform_divisor: f64,
    /// Ratio of the geometric `u` spacing outside the uniform band.
    pub geometric_ratio: f64,
    pub taylor_order: usize,
    /// Maximum number of Taylor enclosures per polynomial.
    pub max_enclosures: usize,
    pub max_depth: u32,
    pub use_fallbacks: bool,
    pub sturm_degree_cap: usize,
    pub eigen_degree_cap: usize,
    pub eigen_imag_tol: f64,
}

impl Default for CertificationPolicy {
    fn default() -> Self {
        Self {
            u_max_extra: 10.0,
            uniform_divisor: 4.0,
            geometric_ratio: 1.25,
            taylor_order: 3,
            max_enclosures: 20_000,
            max_depth: 60,
            use_fallbacks: true,
            sturm_degree_cap: STURM_DEGREE_CAP,
            eigen_degree_cap: EIGEN_DEGREE_CAP,
            eigen_imag_tol: 1e-8,
        }
    }
}

/// Strict sign changes between consecutive nonzero values of `Q` on `grid`.
pub fn sign_change_count(sample: &PolynomialSample, grid: &[f64]) -> Result<usize> {
    if grid.len() < 2 {
        return Err(Error::InvalidParameter {
            name: "grid",
            reason: "needs at least two points".into(),
        });
    }
    if grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidParameter {
            name: "grid",
            reason: "must be strictly increasing".into(),
        });
    }
    let mut last = 0.0f64;
    let mut changes = 0;
    for &x in grid {
        let v = horner(sample.coefficients(), x);
        if !v.is_finite() {
            return Err(Error::Overflow { u: x.abs().ln() });
        }
        if v != 0.0 {
            let s = v.signum();
            if last != 0.0 && s != last {
                changes += 1;
            }
            last = s;
        }
    }
    Ok(changes)
}

/// `x = e^u` grid on `[0, 1]`, ascending, used for every branch of degree `n`.
pub fn unit_grid(n: usize, policy: &CertificationPolicy) -> Vec<f64> {
    let nf = n.max(2) as f64;
    let band = nf.ln() / nf;
    let u_max = nf.ln() + policy.u_max_extra;
    let step = 1.0 / (policy.uniform_divisor * nf);
    let mut us = vec![0.0];
    let mut u = step;
    while u < band {
        us.push(u);
        u += step;
    }
    let mut u = band;
    while u < u_max {
        us.push(u);
        u *= policy.geometric_ratio;
    }
    us.push(u_max);
    let mut xs: Vec<f64> = us.iter().map(|u| (-u).exp()).collect();
    xs.push(0.0);
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    xs
}

fn trim_top(c: &[f64]) -> &[f64] {
    let mut end = c.len();
    while end > 0 && c[end - 1] == 0.0 {
        end -= 1;
    }
    &c[..end]
}

fn branches(p: &[f64]) -> [Branch; 4] {
    let alt = |v: &mut Vec<f64>| {
        for (i, c) in v.iter_mut().enumerate() {
            if i % 2 == 1 {
                *c = -*c;
            }
        }
    };
    let f1 = p.to_vec();
    let mut f2 = p.to_vec();
    alt(&mut f2);
    let mut f3 = p.to_vec();
    f3.reverse();
    let mut f4 = f3.clone();
    alt(&mut f4);
    [Branch::new(f1), Branch::new(f2), Branch::new(f3), Branch::new(f4)]
}

/// Reusable certifier for one polynomial degree.
#[derive(Debug)]
pub struct RootCertifier {
    policy: CertificationPolicy,
    degree: usize,
    grid: Vec<f64>,
    scratch: Scratch,
}

impl RootCertifier {
    pub fn new(degree: usize, policy: CertificationPolicy) -> Self {
        Self {
            policy,
            degree,
            grid: unit_grid(degree, &policy),
            scratch: Scratch::default(),
        }
    }

    pub fn policy(&self) -> &CertificationPolicy {
        &self.policy
    }

    fn grid_for(&self, n: usize) -> std::borrow::Cow<'_, [f64]> {
        if n == self.degree {
            std::borrow::Cow::Borrowed(&self.grid)
        } else {
            std::borrow::Cow::Owned(unit_grid(n, &self.policy))
        }
    }

    /// Decide whether the polynomial has a real zero.
    pub fn has_real_root(&mut self, coefficients: &[f64]) -> Result<RootCountResult> {
        let (p, zero_root) = prepare(coefficients)?;
        if zero_root {
            return Ok(RootCountResult::has_root(Certification::GridSignChange));
        }
        let n = p.len() - 1;
        if n == 0 {
            return Ok(RootCountResult::counted(0, Certification::IntervalCertified));
        }
        if n % 2 == 1 || p[0].signum() != p[n].signum() {
            return Ok(RootCountResult::has_root(Certification::GridSignChange));
        }
        let bs = branches(&p);
        let grid = self.grid_for(n).into_owned();
        // Scan from x = 1 inwards; zeros cluster near |x| = 1.
        for b in &bs {
            let s0 = b.sign_at_zero();
            for &x in grid.iter().rev() {
                if let Some(s) = b.sign_at(x) {
                    if s != s0 {
                        return Ok(RootCountResult::has_root(Certification::GridSignChange));
                    }
                }
            }
        }
        let order = self.policy.taylor_order;
        let mut budget = self.policy.max_enclosures;
        let mut stack: Vec<(f64, f64, u32)> = Vec::new();
        for b in &bs {
            let s0 = b.sign_at_zero();
            stack.clear();
            stack.extend(grid.windows(2).rev().map(|w| (w[0], w[1], 0)));
            while let Some((lo, hi, depth)) = stack.pop() {
                if budget == 0 || depth > self.policy.max_depth {
                    return self.fallback_decide(&p);
                }
                budget -= 1;
                if enclose(b, lo, hi, order, &mut self.scratch).value_margin > 0.0 {
                    continue;
                }
                let mid = 0.5 * (lo + hi);
                if let Some(s) = b.sign_at(mid) {
                    if s != s0 {
                        return Ok(RootCountResult::has_root(Certification::GridSignChange));
                    }
                }
                stack.push((mid, hi, depth + 1));
                stack.push((lo, mid, depth + 1));
            }
        }
        Ok(RootCountResult::counted(0, Certification::IntervalCertified))
    }

    /// Count distinct real zeros.
    pub fn count_real_roots(&mut self, coefficients: &[f64]) -> Result<RootCountResult> {
        let (p, zero_root) = prepare(coefficients)?;
        let extra = usize::from(zero_root);
        let n = p.len() - 1;
        if n == 0 {
            return Ok(RootCountResult::counted(extra, Certification::IntervalCertified));
        }
        let bs = branches(&p);
        let grid = self.grid_for(n).into_owned();
        let mut total = extra;
        let mut budget = self.policy.max_enclosures;
        for b in &bs {
            match self.count_branch(b, &grid, &mut budget) {
                Some(k) => total += k,
                None => return self.fallback_count(&p, extra),
            }
        }
        Ok(RootCountResult::counted(total, Certification::IntervalCertified))
    }

    fn count_branch(&mut self, b: &Branch, grid: &[f64], budget: &mut usize) -> Option<usize> {
        let mut pts: Vec<(f64, f64)> = Vec::with_capacity(grid.len());
        pts.push((0.0, b.sign_at_zero()));
        for &x in &grid[1..] {
            if let Some(s) = b.sign_at(x) {
                pts.push((x, s));
            } else if x == 1.0 {
                return None;
            }
        }
        if pts.last().map(|p| p.0) != Some(1.0) {
            return None;
        }
        let order = self.policy.taylor_order;
        let mut count = 0usize;
        let mut stack: Vec<(f64, f64, f64, f64, u32)> =
            pts.windows(2).rev().map(|w| (w[0].0, w[1].0, w[0].1, w[1].1, 0)).collect();
        while let Some((lo, hi, slo, shi, depth)) = stack.pop() {
            if *budget == 0 || depth > self.policy.max_depth {
                return None;
            }
            *budget -= 1;
            let e = enclose(b, lo, hi, order, &mut self.scratch);
            if slo == shi && e.value_margin > 0.0 {
                continue;
            }
            if slo != shi {
                if e.slope_margin > 0.0 {
                    count += 1;
                    continue;
                }
            }
            let mut split = None;
            for frac in [0.5, 0.382, 0.618, 0.25, 0.75] {
                let x = lo + frac * (hi - lo);
                if x > lo && x < hi {
                    if let Some(s) = b.sign_at(x) {
                        split = Some((x, s));
                        break;
                    }
                }
            }
            let (mid, smid) = split?;
            stack.push((mid, hi, smid, shi, depth + 1));
            stack.push((lo, mid, slo, smid, depth + 1));
        }
        Some(count)
    }

    fn fallback_decide(&mut self, p: &[f64]) -> Result<RootCountResult> {
        match self.fallback_count(p, 0)? {
            r if r.verdict == Verdict::Unknown => Ok(r),
            r => Ok(RootCountResult {
                count: None,
                ..r
            }),
        }
    }

    fn fallback_count(&mut self, p: &[f64], extra: usize) -> Result<RootCountResult> {
        if !self.policy.use_fallbacks {
            return Ok(RootCountResult::unknown());
        }
        let n = p.len() - 1;
        if n <= self.policy.sturm_degree_cap {
            let k = count_real_roots_sturm(&rational_coefficients(p)?)?;
            return Ok(RootCountResult::counted(k + extra, Certification::SturmExact));
        }
        if n <= self.policy.eigen_degree_cap {
            if let Ok(k) = count_real_eigenvalues(p, self.policy.eigen_imag_tol) {
                return Ok(RootCountResult::counted(k + extra, Certification::EigenvalueOracle));
            }
        }
        Ok(RootCountResult::unknown())
    }
}

/// Trim the top, strip a root at zero. Returns the deflated coefficients and
/// whether `x = 0` is a root.
fn prepare(c: &[f64]) -> Result<(Vec<f64>, bool)> {
    if let Some(v) = c.iter().find(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "coefficients",
            reason: format!("non-finite coefficient {v}"),
        });
    }
    let c = trim_top(c);
    if c.is_empty() {
        return Err(Error::DegenerateInput("zero polynomial".into()));
    }
    let low = c.iter().position(|v| *v != 0.0).unwrap();
    Ok((c[low..].to_vec(), low > 0))
}

pub fn has_real_root_certified(sample: &PolynomialSample, policy: &CertificationPolicy) -> Result<RootCountResult> {
    RootCertifier::new(sample.degree(), *policy).has_real_root(sample.coefficients())
}

pub fn count_real_roots_certified(sample: &PolynomialSample, policy: &CertificationPolicy) -> Result<RootCountResult> {
    RootCertifier::new(sample.degree(), *policy).count_real_roots(sample.coefficients())
}
