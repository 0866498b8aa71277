//! Simulation and analysis of a wirelessly powered multi-antenna link.
//!
//! A multi-antenna terminal charges a single-antenna device over the air for
//! a duration `tau` of each slot of length `T`, steering the transmit energy
//! with a beam picked from a shared quantization codebook of `2^B` entries
//! (the device feeds back only the codeword index). The device then spends
//! the remaining `T - tau` transmitting its data with whatever energy it
//! harvested. Longer harvesting means more transmit power but less airtime,
//! so there is an optimal split.
//!
//! The crate provides:
//!
//! - [`model`] — system parameters, unit conversions, path loss;
//! - [`channel`] — fading draws and the correlated estimation-error model;
//! - [`codebook`] — random vector quantization, codeword selection, and the
//!   exact order statistics of the quantization gain;
//! - [`bounds`] — closed-form upper/lower bounds on the average rate and
//!   their coefficient algebra;
//! - [`tradeoff`] — solvers for the optimal harvest duration under each
//!   bound (UA, LA) plus the equal-split baseline (EA);
//! - [`montecarlo`] — a deterministic, parallel estimator of the true
//!   average rate and the numerically optimal split (OA).

pub mod bounds;
pub mod channel;
pub mod codebook;
pub mod cvec;
pub mod error;
pub mod model;
pub mod montecarlo;
pub mod rng;
pub mod tradeoff;

pub use error::Error;
pub use model::{FormulaMode, SystemParams};
