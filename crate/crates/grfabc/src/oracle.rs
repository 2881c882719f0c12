//! Memoised exact marginals for the toy comparison.

use std::collections::HashMap;
use std::sync::RwLock;

use grfabc_core::grf::{suff_stat_bernoulli, suff_stat_markov};
use grfabc_core::toy::{marginal_m0, marginal_m1, posterior_from_evidence, ToyPosterior};
use grfabc_core::{Configuration, ModelPrior, Result};

/// Caches `(model, statistic, n) → ln marginal`. Readers never block each
/// other; a miss computes outside the lock, so two threads may both compute
/// the same entry, with identical results.
#[derive(Debug, Default)]
pub struct OracleCache {
    entries: RwLock<HashMap<(u8, u64, u64), f64>>,
}

impl OracleCache {
    pub fn new() -> Self {
        Self::default()
    }

    fn lookup(&self, key: (u8, u64, u64), compute: impl FnOnce() -> Result<f64>) -> Result<f64> {
        if let Some(&v) = self
            .entries
            .read()
            .expect("oracle cache poisoned")
            .get(&key)
        {
            return Ok(v);
        }
        let v = compute()?;
        self.entries
            .write()
            .expect("oracle cache poisoned")
            .insert(key, v);
        Ok(v)
    }

    pub fn ln_marginal_m0(&self, s0: u64, n: u64) -> Result<f64> {
        self.lookup((0, s0, n), || marginal_m0(s0, n).map(|m| m.ln_value))
    }

    pub fn ln_marginal_m1(&self, s1: u64, n: u64) -> Result<f64> {
        self.lookup((1, s1, n), || marginal_m1(s1, n).map(|m| m.ln_value))
    }

    pub fn len(&self) -> usize {
        self.entries.read().expect("oracle cache poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn posterior(&self, x0: &Configuration, prior: &ModelPrior) -> Result<ToyPosterior> {
        if x0.is_empty() {
            return Err(grfabc_core::Error::EmptyConfiguration);
        }
        let n = x0.len() as u64;
        let e0 = self.ln_marginal_m0(suff_stat_bernoulli(x0) as u64, n)?;
        let e1 = self.ln_marginal_m1(suff_stat_markov(x0) as u64, n)?;
        let mut post = posterior_from_evidence(e0, e1, prior)?;
        post.constant_data = x0.is_constant();
        Ok(post)
    }
}
