use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Slowly varying factor of a regularly varying variance profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SlowlyVarying {
    /// `L ≡ 1`.
    Constant,
    /// `L(x) = ln(e + x)`.
    LogShifted,
    /// `L(x) = 1 / ln(e + x)`.
    InverseLog,
}

impl SlowlyVarying {
    pub const ALL: [SlowlyVarying; 3] = [Self::Constant, Self::LogShifted, Self::InverseLog];

    #[inline]
    pub fn eval(self, x: f64) -> f64 {
        match self {
            Self::Constant => 1.0,
            Self::LogShifted => (std::f64::consts::E + x).ln(),
            Self::InverseLog => 1.0 / (std::f64::consts::E + x).ln(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Constant => "constant",
            Self::LogShifted => "log_shifted",
            Self::InverseLog => "inverse_log",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|l| l.name() == s)
    }
}

/// Variance profile `R(0) = 1`, `R(i) = i^alpha L(i)` for `i ≥ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegularlyVaryingWeight {
    alpha: f64,
    slowly_varying: SlowlyVarying,
}

impl RegularlyVaryingWeight {
    pub fn new(alpha: f64, slowly_varying: SlowlyVarying) -> Result<Self> {
        if !(alpha.is_finite() && alpha > -1.0) {
            return Err(invalid("alpha", format!("must be finite and > -1, got {alpha}")));
        }
        Ok(Self {
            alpha,
            slowly_varying,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn slowly_varying(&self) -> SlowlyVarying {
        self.slowly_varying
    }

    /// `R(i)`.
    #[inline]
    pub fn r(&self, i: u64) -> f64 {
        if i == 0 {
            1.0
        } else {
            self.r_real(i as f64)
        }
    }

    /// `x^alpha L(x)` extended to real arguments `x > 0`.
    #[inline]
    pub fn r_real(&self, x: f64) -> f64 {
        x.powf(self.alpha) * self.slowly_varying.eval(x)
    }

    /// `ln R(x)` for real `x ≥ 1`, safe for very large arguments.
    pub fn ln_r_real(&self, x: f64) -> f64 {
        self.alpha * x.ln() + self.slowly_varying.eval(x).ln()
    }

    /// `√R(i)` for `i = 0..=n`.
    pub fn sqrt_table(&self, n: usize) -> Vec<f64> {
        (0..=n as u64).map(|i| self.r(i).sqrt()).collect()
    }
}
