//! Constrained empirical risk minimization for active learning.
//!
//! The crate trains hypotheses under norm constraints that place their induced
//! loss functions inside the generator class of an integral probability metric
//! (Kantorovich or total variation), assembles the resulting four-term
//! generalization bound, and runs query strategies that trade informativeness
//! against representativeness of the labeled sample.
//!
//! Module map:
//! - [`data`], [`task`], [`config`], [`rng`]: pools, synthetic tasks, configs, seeding
//! - [`ipm`]: empirical Kantorovich and total-variation estimates
//! - [`hypotheses`]: hypothesis classes, losses, projections, certificates, training
//! - [`complexity`]: Monte-Carlo empirical Rademacher complexity
//! - [`bounds`]: bound assembly, true-risk Monte Carlo, coverage experiments
//! - [`query`]: query strategies and the active-learning loop
//! - [`cli`]: command-line front end

pub mod bounds;
pub mod cli;
pub mod complexity;
pub mod config;
pub mod data;
mod error;
pub mod hypotheses;
pub mod ipm;
pub mod query;
pub mod rng;
pub mod task;

pub use error::{Error, Result};
