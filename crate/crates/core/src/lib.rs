//! Learning robot inverse dynamics with Gaussian process regression.
//!
//! The crate bundles a Lagrangian rigid-body engine (ground truth and
//! model-based baselines), the augmented polynomial input space, a bank of
//! covariance functions including the geometrically inspired polynomial
//! (GIP) kernel, exact GP inference with marginal-likelihood training, data
//! generation utilities and the benchmark harness.

pub mod bench;
pub mod data;
pub mod dynamics;
pub mod error;
pub mod features;
pub mod gp;
pub mod kernels;
pub mod linalg;

pub use error::{Error, Result};
