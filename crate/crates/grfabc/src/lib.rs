//! File formats, parallel execution and the command-line front end for
//! ABC model choice between Gibbs random fields. The computation itself
//! lives in `grfabc-core`.

pub mod cli;
pub mod commands;
pub mod config;
pub mod engine;
pub mod error;
pub mod formats;
pub mod oracle;

pub use grfabc_core as core;

pub use config::{EpsilonMode, RunConfig};
pub use engine::Engine;
pub use error::{CliError, Result};
