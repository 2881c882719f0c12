//! The four command verbs. Each returns the text it prints on stdout and
//! writes its result files under the configured output directory.

mod abc;
mod protein;
mod toy;

use std::collections::BTreeMap;

use grfabc_core::estimators::{jeffreys_category, BfEstimate};
use grfabc_core::{Epsilon, LogBase};
use serde::Serialize;
use serde_json::Value;

use crate::config::RunConfig;

pub use abc::{abc_run, pilot_epsilon, AbcRunArgs, TWO_STEP_FIRST_SHARE};
pub use protein::{
    compare_pair, pair_seed, protein_select, select_structures, ProteinArgs, SelectionRow,
    THETA_PRIOR,
};
pub use toy::{
    confusion_matrix, quantile_type7, toy_experiment, AcceptanceRow, RatioQuantiles, ToyRow,
};

pub const TOOL: &str = "grfabc";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Fields every JSON summary starts with.
#[derive(Debug, Serialize)]
pub struct Header {
    pub tool: &'static str,
    pub version: &'static str,
    pub core_version: &'static str,
    pub command: &'static str,
    pub config: BTreeMap<&'static str, String>,
}

impl Header {
    pub fn new(command: &'static str, config: &RunConfig) -> Self {
        Header {
            tool: TOOL,
            version: VERSION,
            core_version: grfabc_core::VERSION,
            command,
            config: config.echo(),
        }
    }
}

/// `log_base(BF)` from `ln BF`, without forming `BF` itself.
pub fn log_from_ln(base: LogBase, ln_value: f64) -> f64 {
    match base {
        LogBase::Ten => ln_value / std::f64::consts::LN_10,
        LogBase::E => ln_value,
    }
}

pub fn category_from_ln(base: LogBase, ln_value: f64) -> &'static str {
    jeffreys_category(log_from_ln(base, ln_value)).as_str()
}

/// JSON has no infinity; an infinite tolerance is written as `"inf"`.
pub fn epsilon_json(eps: Epsilon) -> Value {
    match eps {
        Epsilon::Infinite => Value::from("inf"),
        Epsilon::Finite(v) => Value::from(v),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EstimateReport {
    pub estimator: &'static str,
    pub bf: f64,
    pub log_bf: f64,
    pub category: &'static str,
    /// Prior odds (or reweighting factor) folded into `bf`.
    pub factor: f64,
}

impl EstimateReport {
    pub fn new(est: &BfEstimate, base: LogBase) -> Self {
        EstimateReport {
            estimator: est.kind.as_str(),
            bf: est.value,
            log_bf: base.log(est.value),
            category: est.jeffreys.as_str(),
            factor: est.prior_odds_used,
        }
    }
}
