//! Derivative-free parameter extraction for device compact models.
//!
//! The pieces, bottom up:
//!
//! - [`loss`]: thresholded log-relative losses, the clipped robust variant,
//!   per-experiment means, the weighted scalarizer and thresholded reports.
//! - [`space`]: box-bounded parameters with linear or log coordinates.
//! - [`parzen`] and [`sampler`]: random and Tree-structured Parzen Estimator
//!   sampling, studies and best-so-far curves.
//! - [`models`]: built-in diode and FET models plus an external-simulator bridge.
//! - [`workflow`]: split, optimise, assess, tighten, retrain, report.

pub mod error;
pub mod format;
pub mod loss;
pub mod models;
pub mod parzen;
pub mod sampler;
pub mod space;
pub mod workflow;

pub use error::{Error, EvalFailure, Result};
