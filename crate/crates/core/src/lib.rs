//! Decoding sparse signals from 1-bit measurements.
//!
//! The decoder is cardinality-constrained least squares
//!
//! ```text
//! minimize (1/2m) ||y - Psi x||^2   subject to   ||x||_0 <= s
//! ```
//!
//! solved with a generalized Newton (active-set / hard-threshold pursuit)
//! iteration. Around it sit the synthetic data model, comparison decoders,
//! restricted-spectrum diagnostics, and a Monte Carlo benchmark harness.

pub mod baselines;
pub mod bench;
pub mod dataset;
pub mod diagnostics;
mod error;
pub mod haar;
pub mod model;
pub mod report;
pub mod solver;

pub use error::{Error, Result};

pub use nalgebra::{DMatrix, DVector};
