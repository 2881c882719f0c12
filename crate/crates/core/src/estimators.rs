//! Posterior-probability and Bayes-factor estimators built from the model
//! indices of accepted proposals.

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};
use crate::sampler::ModelPrior;

/// Accepted-proposal counts per model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelCounts {
    counts: Vec<u64>,
}

impl ModelCounts {
    pub fn new(counts: Vec<u64>) -> Self {
        ModelCounts { counts }
    }

    pub fn get(&self, m: usize) -> u64 {
        self.counts[m]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.counts
    }

    pub fn n_models(&self) -> usize {
        self.counts.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimatorKind {
    Plugin,
    Smoothed,
    Reweighted,
}

impl EstimatorKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            EstimatorKind::Plugin => "plugin",
            EstimatorKind::Smoothed => "smoothed",
            EstimatorKind::Reweighted => "reweighted",
        }
    }
}

/// Base of the logarithm used for the Jeffreys scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LogBase {
    #[default]
    Ten,
    E,
}

impl LogBase {
    pub fn log(&self, x: f64) -> f64 {
        match self {
            LogBase::Ten => libm::log10(x),
            LogBase::E => libm::log(x),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            LogBase::Ten => "10",
            LogBase::E => "e",
        }
    }
}

impl FromStr for LogBase {
    type Err = ();

    fn from_str(s: &str) -> core::result::Result<Self, ()> {
        match s {
            "10" => Ok(LogBase::Ten),
            "e" | "E" => Ok(LogBase::E),
            _ => Err(()),
        }
    }
}

/// Jeffreys evidence category for `BF_{m0/m1}`, ordered from decisive for
/// model 1 to decisive for model 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum JeffreysCategory {
    DecisiveM1,
    StrongM1,
    SubstantialM1,
    WeakM1,
    WeakM0,
    SubstantialM0,
    StrongM0,
    DecisiveM0,
}

impl JeffreysCategory {
    pub const ALL: [JeffreysCategory; 8] = [
        JeffreysCategory::DecisiveM1,
        JeffreysCategory::StrongM1,
        JeffreysCategory::SubstantialM1,
        JeffreysCategory::WeakM1,
        JeffreysCategory::WeakM0,
        JeffreysCategory::SubstantialM0,
        JeffreysCategory::StrongM0,
        JeffreysCategory::DecisiveM0,
    ];

    /// Position 0..8 on the scale.
    pub fn rank(&self) -> usize {
        *self as usize
    }

    /// The same strength of evidence for the other model.
    pub fn mirror(&self) -> Self {
        Self::ALL[7 - self.rank()]
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            JeffreysCategory::DecisiveM1 => "m1-decisive",
            JeffreysCategory::StrongM1 => "m1-strong",
            JeffreysCategory::SubstantialM1 => "m1-substantial",
            JeffreysCategory::WeakM1 => "m1-weak",
            JeffreysCategory::WeakM0 => "m0-weak",
            JeffreysCategory::SubstantialM0 => "m0-substantial",
            JeffreysCategory::StrongM0 => "m0-strong",
            JeffreysCategory::DecisiveM0 => "m0-decisive",
        }
    }
}

impl fmt::Display for JeffreysCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for JeffreysCategory {
    type Err = ();

    fn from_str(s: &str) -> core::result::Result<Self, ()> {
        Self::ALL.into_iter().find(|c| c.as_str() == s).ok_or(())
    }
}

/// Classify a log Bayes factor. Thresholds 0.5, 1 and 2; a value on a
/// threshold goes to the weaker side, and 0 counts as weak for model 0.
pub fn jeffreys_category(log_bf: f64) -> JeffreysCategory {
    let strength = |z: f64| -> usize {
        if z <= 0.5 {
            0
        } else if z <= 1.0 {
            1
        } else if z <= 2.0 {
            2
        } else {
            3
        }
    };
    if log_bf >= 0.0 {
        JeffreysCategory::ALL[4 + strength(log_bf)]
    } else {
        JeffreysCategory::ALL[3 - strength(-log_bf)]
    }
}

/// A Bayes factor `BF_{m0/m1}` estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct BfEstimate {
    pub value: f64,
    pub kind: EstimatorKind,
    pub prior_odds_used: f64,
    pub counts: ModelCounts,
    pub jeffreys: JeffreysCategory,
}

impl BfEstimate {
    fn new(
        value: f64,
        kind: EstimatorKind,
        prior_odds_used: f64,
        counts: &ModelCounts,
        base: LogBase,
    ) -> Self {
        BfEstimate {
            value,
            kind,
            prior_odds_used,
            counts: counts.clone(),
            jeffreys: jeffreys_category(base.log(value)),
        }
    }
}

fn require_two(counts: &ModelCounts) -> Result<()> {
    if counts.n_models() != 2 {
        return Err(Error::NotTwoModels(counts.n_models()));
    }
    Ok(())
}

/// `π(M = m1) / π(M = m0)`.
fn prior_odds(prior: &ModelPrior) -> Result<f64> {
    if prior.len() != 2 {
        return Err(Error::NotTwoModels(prior.len()));
    }
    Ok(prior.weight(1) / prior.weight(0))
}

/// `N_m / N`.
pub fn posterior_prob_hat(counts: &ModelCounts, m: usize) -> Result<f64> {
    if m >= counts.n_models() {
        return Err(Error::ModelIndex {
            index: m,
            models: counts.n_models(),
        });
    }
    let n = counts.total();
    if n == 0 {
        return Err(Error::NoAcceptances);
    }
    Ok(counts.get(m) as f64 / n as f64)
}

/// `(N_0 / N_1) · π(M=m1)/π(M=m0)`; undefined when `N_1 = 0`.
pub fn bf_plugin(
    counts: &ModelCounts,
    target_prior: &ModelPrior,
    base: LogBase,
) -> Result<BfEstimate> {
    require_two(counts)?;
    let odds = prior_odds(target_prior)?;
    if counts.get(1) == 0 {
        return Err(Error::PluginUndefined(1));
    }
    let value = counts.get(0) as f64 / counts.get(1) as f64 * odds;
    Ok(BfEstimate::new(
        value,
        EstimatorKind::Plugin,
        odds,
        counts,
        base,
    ))
}

/// `((1 + N_0) / (1 + N_1)) · π(M=m1)/π(M=m0)`, defined for all counts.
pub fn bf_smoothed(
    counts: &ModelCounts,
    target_prior: &ModelPrior,
    base: LogBase,
) -> Result<BfEstimate> {
    require_two(counts)?;
    let odds = prior_odds(target_prior)?;
    let value = smoothed_ratio(counts) * odds;
    Ok(BfEstimate::new(
        value,
        EstimatorKind::Smoothed,
        odds,
        counts,
        base,
    ))
}

fn smoothed_ratio(counts: &ModelCounts) -> f64 {
    (1 + counts.get(0)) as f64 / (1 + counts.get(1)) as f64
}

/// Ratio of the Dirichlet(1, …, 1) posterior means of `p_0` and `p_1`.
pub fn dirichlet_mean_ratio(counts: &ModelCounts) -> f64 {
    let total = counts.total() as f64 + counts.n_models() as f64;
    let mean = |j: usize| (counts.get(j) as f64 + 1.0) / total;
    mean(0) / mean(1)
}

/// Bias of the smoothed estimator given `N` acceptances, when `N_1 ~ B(N, p)`
/// and `BF = (1 − p)/p`:
/// `E[(N_0+1)/(N_1+1) | N] − BF = {1 − (N+2)(1−p)^{N+1}} / ((N+1)p)`.
pub fn bf_bias(p: f64, n: u64) -> Result<f64> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::InvalidProbability(p));
    }
    let nf = n as f64;
    let tail = (nf + 2.0) * libm::pow(1.0 - p, nf + 1.0);
    Ok((1.0 - tail) / ((nf + 1.0) * p))
}

/// Smoothed count ratio from a run whose model draws put mass `rho` on
/// model 1, corrected by `rho / (1 − rho)` to estimate the equal-prior
/// Bayes factor.
pub fn bf_reweighted(counts: &ModelCounts, rho: f64, base: LogBase) -> Result<BfEstimate> {
    require_two(counts)?;
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::InvalidProbability(rho));
    }
    let correction = rho / (1.0 - rho);
    let value = smoothed_ratio(counts) * correction;
    Ok(BfEstimate::new(
        value,
        EstimatorKind::Reweighted,
        correction,
        counts,
        base,
    ))
}

/// Lower clamp of the tilted sampling probability; the upper clamp is
/// `1 − RHO_CLAMP`.
pub const RHO_CLAMP: f64 = 0.01;

/// Sampling mass on model 1 for the second run of the two-step scheme,
/// proportional to `1 / P̃(M = m1 | x0)` with `P̃_j = (N_j + 1)/(N + 2)`.
pub fn two_step_rho(first_run: &ModelCounts) -> Result<f64> {
    require_two(first_run)?;
    let n = first_run.total() as f64;
    let p0 = (first_run.get(0) as f64 + 1.0) / (n + 2.0);
    let p1 = (first_run.get(1) as f64 + 1.0) / (n + 2.0);
    let rho = (1.0 / p1) / (1.0 / p0 + 1.0 / p1);
    Ok(rho.clamp(RHO_CLAMP, 1.0 - RHO_CLAMP))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn counts(a: u64, b: u64) -> ModelCounts {
        ModelCounts::new(vec![a, b])
    }

    fn equal() -> ModelPrior {
        ModelPrior::uniform(2)
    }

    /// `E[(N − K + 1)/(K + 1)] − (1 − p)/p` for `K ~ B(N, p)`, summed term
    /// by term.
    fn enumerated_bias(p: f64, n: u64) -> f64 {
        let mut binom = 1.0f64;
        let mut total = 0.0;
        for k in 0..=n {
            if k > 0 {
                binom = binom * (n - k + 1) as f64 / k as f64;
            }
            let w = binom * p.powi(k as i32) * (1.0 - p).powi((n - k) as i32);
            total += w * (n - k + 1) as f64 / (k + 1) as f64;
        }
        total - (1.0 - p) / p
    }

    #[test]
    fn posterior_probabilities() {
        assert_relative_eq!(posterior_prob_hat(&counts(30, 70), 0).unwrap(), 0.3);
        assert_eq!(posterior_prob_hat(&counts(0, 5), 0).unwrap(), 0.0);
        assert_eq!(
            posterior_prob_hat(&counts(0, 0), 0),
            Err(Error::NoAcceptances)
        );
        assert!(posterior_prob_hat(&counts(1, 1), 2).is_err());
    }

    #[test]
    fn plugin_estimator() {
        assert_eq!(
            bf_plugin(&counts(60, 30), &equal(), LogBase::Ten)
                .unwrap()
                .value,
            2.0
        );
        assert_eq!(
            bf_plugin(&counts(10, 0), &equal(), LogBase::Ten),
            Err(Error::PluginUndefined(1))
        );
        let odds3 = ModelPrior::new(vec![0.25, 0.75]).unwrap();
        assert_relative_eq!(
            bf_plugin(&counts(50, 50), &odds3, LogBase::Ten)
                .unwrap()
                .value,
            3.0
        );
    }

    #[test]
    fn smoothed_estimator() {
        let e = bf_smoothed(&counts(9, 4), &equal(), LogBase::Ten).unwrap();
        assert_eq!(e.value, 2.0);
        assert_eq!(e.kind, EstimatorKind::Smoothed);
        assert_eq!(
            bf_smoothed(&counts(0, 0), &equal(), LogBase::Ten)
                .unwrap()
                .value,
            1.0
        );
        let odds2 = ModelPrior::new(vec![1.0 / 3.0, 2.0 / 3.0]).unwrap();
        assert_relative_eq!(
            bf_smoothed(&counts(9, 4), &odds2, LogBase::Ten)
                .unwrap()
                .value,
            4.0
        );
        assert!(bf_smoothed(
            &ModelCounts::new(vec![1, 2, 3]),
            &ModelPrior::uniform(3),
            LogBase::Ten
        )
        .is_err());
    }

    #[test]
    fn bias_formula() {
        assert_relative_eq!(bf_bias(1.0, 9).unwrap(), 0.1, max_relative = 1e-15);
        assert!((bf_bias(0.5, 20).unwrap() - enumerated_bias(0.5, 20)).abs() < 1e-12);
        assert!(bf_bias(0.5, 10_000).unwrap() < 1e-3);
        assert_eq!(bf_bias(0.0, 3), Err(Error::InvalidProbability(0.0)));
    }

    #[test]
    fn bias_law_exhaustive() {
        for n in 0..=25 {
            for p in [0.1, 0.3, 0.5, 0.7, 0.9] {
                let diff = (bf_bias(p, n).unwrap() - enumerated_bias(p, n)).abs();
                assert!(diff < 1e-12, "N={n} p={p}: {diff}");
            }
        }
    }

    #[test]
    fn reweighted_estimator() {
        assert_relative_eq!(
            bf_reweighted(&counts(50, 50), 0.9, LogBase::Ten)
                .unwrap()
                .value,
            9.0,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            bf_reweighted(&counts(0, 99), 0.99, LogBase::Ten)
                .unwrap()
                .value,
            0.99,
            max_relative = 1e-12
        );
        assert_eq!(
            bf_reweighted(&counts(7, 3), 0.5, LogBase::Ten)
                .unwrap()
                .value,
            bf_smoothed(&counts(7, 3), &equal(), LogBase::Ten)
                .unwrap()
                .value
        );
        assert!(bf_reweighted(&counts(1, 1), 1.0, LogBase::Ten).is_err());
        assert!(bf_reweighted(&counts(1, 1), 0.0, LogBase::Ten).is_err());
    }

    #[test]
    fn two_step_rho_values() {
        assert_relative_eq!(two_step_rho(&counts(10, 10)).unwrap(), 0.5);
        assert_relative_eq!(
            two_step_rho(&counts(97, 1)).unwrap(),
            0.98,
            max_relative = 1e-12
        );
        assert_eq!(two_step_rho(&counts(100_000, 0)).unwrap(), 0.99);
        assert_eq!(two_step_rho(&counts(0, 100_000)).unwrap(), 0.01);
    }

    #[test]
    fn jeffreys_thresholds() {
        assert_eq!(jeffreys_category(2.5), JeffreysCategory::DecisiveM0);
        assert_eq!(jeffreys_category(-0.3), JeffreysCategory::WeakM1);
        assert_eq!(jeffreys_category(0.7), JeffreysCategory::SubstantialM0);
        assert_eq!(jeffreys_category(1.5), JeffreysCategory::StrongM0);
        assert_eq!(jeffreys_category(0.0), JeffreysCategory::WeakM0);
        assert_eq!(jeffreys_category(0.5), JeffreysCategory::WeakM0);
        assert_eq!(jeffreys_category(1.0), JeffreysCategory::SubstantialM0);
        assert_eq!(jeffreys_category(2.0), JeffreysCategory::StrongM0);
        assert_eq!(jeffreys_category(-2.0), JeffreysCategory::StrongM1);
        assert_eq!(jeffreys_category(-7.0), JeffreysCategory::DecisiveM1);
        for c in JeffreysCategory::ALL {
            assert_eq!(c.as_str().parse::<JeffreysCategory>(), Ok(c));
        }
        let e = bf_smoothed(&counts(999, 0), &equal(), LogBase::Ten).unwrap();
        assert_eq!(e.jeffreys, JeffreysCategory::DecisiveM0);
        let e = bf_smoothed(&counts(999, 0), &equal(), LogBase::E).unwrap();
        assert_eq!(e.jeffreys, JeffreysCategory::DecisiveM0);
        let e = bf_smoothed(&counts(14, 3), &equal(), LogBase::Ten).unwrap();
        assert_eq!(e.jeffreys, JeffreysCategory::SubstantialM0);
        let e = bf_smoothed(&counts(14, 3), &equal(), LogBase::E).unwrap();
        assert_eq!(e.jeffreys, JeffreysCategory::StrongM0);
    }

    proptest! {
        #[test]
        fn dirichlet_identity(a in 0u64..1_000_000, b in 0u64..1_000_000) {
            let c = counts(a, b);
            let s = bf_smoothed(&c, &equal(), LogBase::Ten).unwrap().value;
            let d = dirichlet_mean_ratio(&c);
            prop_assert!((s - d).abs() <= 1e-14 * s);
        }

        #[test]
        fn jeffreys_mirror(z in -10.0f64..10.0) {
            prop_assume!(z != 0.0);
            prop_assert_eq!(jeffreys_category(-z), jeffreys_category(z).mirror());
        }

        #[test]
        fn smoothed_positive(a in 0u64..1000, b in 0u64..1000, w in 0.01f64..0.99) {
            let prior = ModelPrior::new(vec![1.0 - w, w]).unwrap();
            prop_assert!(bf_smoothed(&counts(a, b), &prior, LogBase::Ten).unwrap().value > 0.0);
            prop_assert!(bf_reweighted(&counts(a, b), w, LogBase::Ten).unwrap().value > 0.0);
        }
    }
}
