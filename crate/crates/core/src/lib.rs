//! Approximate Bayesian computation for model choice between Gibbs random
//! fields.
//!
//! The crate is `no_std` (with `alloc`) and holds everything that is pure
//! computation: sufficient statistics, forward samplers, the rejection
//! engine, Bayes-factor estimators, and the exact oracle for the
//! Bernoulli-versus-Markov toy comparison. IO, parallel execution and the
//! command line live in the `grfabc` companion crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod abc;
mod bigfix;
pub mod error;
pub mod estimators;
pub mod grf;
pub mod protein;
pub mod quad;
pub mod rng;
pub mod sampler;
pub mod toy;

pub use abc::{AbcRun, Epsilon, Proposal, ProposalScratch, Simulator};
pub use error::{Error, Result};
pub use estimators::{BfEstimate, EstimatorKind, JeffreysCategory, LogBase, ModelCounts};
pub use grf::{Configuration, ModelKind, ModelSpec, SiteGraph, StatVector, Statistic};
pub use rng::RngStream;
pub use sampler::ModelPrior;

/// Crate version, echoed into result summaries.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
