//! Persistence probabilities of random polynomials with regularly varying
//! coefficient variances, and the Gaussian processes that govern them.

pub mod error;
pub mod gp_engine;
pub mod limit_cov;
pub mod persistence_mc;
pub mod poly_model;
pub mod quadrature;
pub mod rng;
pub mod root_count;
pub mod stats;

pub use error::{Error, Result};
