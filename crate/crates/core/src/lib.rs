//! Phase synchronization: recover `z ∈ ℂⁿ` with `|z_k| = 1` from the noisy
//! Hermitian measurement `C = z z* + σ W`.
//!
//! The crate provides the measurement model, the generalized power method
//! (GPM), the spectral estimator, quotient-space error metrics and an
//! optimality certificate for candidate solutions.

pub mod certificate;
pub mod error;
pub mod gpm;
pub mod lina;
pub mod metrics;
pub mod model;
pub mod rng;
pub mod spectral;

#[cfg(test)]
mod testutil;

pub use error::{Error, Result};
