//! Variance profiles, coefficient laws, sampling and normalized evaluation
//! of the random polynomial `Q_n(x) = Σ √R(i) ξ_i x^i`.

mod distribution;
mod evaluator;
mod sample;
mod weight;

pub use distribution::{CoefficientDistribution, Family};
pub use evaluator::{scaled_value, NormalizedEvaluator, Region, RegionParams};
pub use sample::{horner, sample_polynomial, PolynomialModel, PolynomialSample};
pub use weight::{RegularlyVaryingWeight, SlowlyVarying};
