//! Numerical laboratory for the Mallows (Wasserstein) distance between an
//! empirical distribution and its population.
//!
//! * [`dist`]: continuous families, step laws and empirical laws.
//! * [`mallows`]: exact and quadrature-based `d_r` via the quantile coupling.
//! * [`bridge`]: Brownian bridge paths and the limit laws of normalised
//!   distances.
//! * [`hazard`]: two-sided hazard diagnostics and tail verdicts.
//! * [`boot`]: bootstrap of the sample mean and its distance bounds.
//! * [`studies`]: Monte Carlo orchestration, reproducible streams, reports.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod boot;
pub mod bridge;
pub mod dist;
pub mod error;
pub mod hazard;
pub mod mallows;
pub mod quad;
pub mod stats;
pub mod studies;

pub use error::{LabError, Result};
