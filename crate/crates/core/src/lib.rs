//! Cached linear-predictor Gibbs sampling for Bayesian GLMs.
//!
//! * [`glm`]: likelihoods, priors, the linear-predictor cache.
//! * [`samplers`]: slice and Metropolis within-Gibbs kernels, sweep schedules, chains.
//! * [`theory`]: exact analysis of deterministic-scan Gibbs on Gaussian targets.
//! * [`diagnostics`]: effective sample size and rate-to-ESS bounds.
//! * [`data`]: loaders, preprocessing and synthetic generators.

pub mod error;
pub mod glm;
pub mod rng;
pub mod samplers;
pub mod theory;
pub mod diagnostics;
pub mod data;

pub use error::{Error, Result};
