//! Binary Gibbs random fields: configurations, neighbourhood graphs,
//! sufficient statistics and unnormalised densities.
//!
//! Every model here has the exponential-family form
//! `f(x | θ) = exp{θ·S(x)} / Z_θ` with a scalar θ and an integer statistic
//! `S`. Normalising constants are only evaluated by the enumeration and
//! closed-form oracles at the bottom of this module.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};

/// Largest site count [`brute_force_ln_z`] will enumerate.
pub const ENUMERATION_CAP: usize = 20;

/// A labelling of `n` sites with states in `{0, 1}`.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Configuration(Vec<u8>);

impl Configuration {
    pub fn new(states: Vec<u8>) -> Result<Self> {
        if let Some((position, &label)) = states.iter().enumerate().find(|(_, &s)| s > 1) {
            return Err(Error::InvalidLabel { position, label });
        }
        Ok(Configuration(states))
    }

    /// Unchecked constructor for samplers that only ever write 0 or 1.
    pub(crate) fn from_raw(states: Vec<u8>) -> Self {
        debug_assert!(states.iter().all(|&s| s <= 1));
        Configuration(states)
    }

    /// Bits of `code`, least significant first, as an `n`-site configuration.
    pub fn from_index(code: u64, n: usize) -> Self {
        Configuration((0..n).map(|i| ((code >> i) & 1) as u8).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn states(&self) -> &[u8] {
        &self.0
    }

    /// Inverse of [`Configuration::from_index`].
    pub fn index(&self) -> u64 {
        self.0
            .iter()
            .enumerate()
            .fold(0u64, |acc, (i, &s)| acc | ((s as u64) << i))
    }

    /// Global label flip 0 <-> 1.
    pub fn flipped(&self) -> Self {
        Configuration(self.0.iter().map(|&s| 1 - s).collect())
    }

    pub fn is_constant(&self) -> bool {
        self.0.windows(2).all(|w| w[0] == w[1])
    }
}

impl fmt::Debug for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Configuration(")?;
        fmt::Display::fmt(self, f)?;
        f.write_str(")")
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &s in &self.0 {
            f.write_str(if s == 1 { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Undirected simple graph over `n_sites` sites.
///
/// Edges are canonical `(min, max)` pairs kept in insertion order; a
/// compressed adjacency list is built once at construction for the Gibbs
/// sampler.
#[derive(Clone, PartialEq, Eq)]
pub struct SiteGraph {
    n_sites: usize,
    edges: Vec<(u32, u32)>,
    offsets: Vec<u32>,
    neighbours: Vec<u32>,
}

impl SiteGraph {
    pub fn new(n_sites: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut canonical: Vec<(u32, u32)> = Vec::new();
        let mut seen = alloc::collections::BTreeSet::new();
        for (a, b) in edges {
            if a == b {
                return Err(Error::SelfLoop(a));
            }
            if a >= n_sites || b >= n_sites {
                return Err(Error::EdgeOutOfRange { a, b, n_sites });
            }
            let e = (a.min(b) as u32, a.max(b) as u32);
            if !seen.insert(e) {
                return Err(Error::DuplicateEdge(e.0 as usize, e.1 as usize));
            }
            canonical.push(e);
        }

        let mut degree = vec![0u32; n_sites];
        for &(a, b) in &canonical {
            degree[a as usize] += 1;
            degree[b as usize] += 1;
        }
        let mut offsets = Vec::with_capacity(n_sites + 1);
        offsets.push(0u32);
        for d in &degree {
            let last = *offsets.last().unwrap();
            offsets.push(last + d);
        }
        let mut fill = offsets.clone();
        let mut neighbours = vec![0u32; 2 * canonical.len()];
        for &(a, b) in &canonical {
            neighbours[fill[a as usize] as usize] = b;
            fill[a as usize] += 1;
            neighbours[fill[b as usize] as usize] = a;
            fill[b as usize] += 1;
        }
        Ok(SiteGraph {
            n_sites,
            edges: canonical,
            offsets,
            neighbours,
        })
    }

    /// Graph with no edges.
    pub fn empty(n_sites: usize) -> Self {
        SiteGraph::new(n_sites, core::iter::empty()).expect("empty edge set is always valid")
    }

    /// Path `0 - 1 - ... - (n-1)`.
    pub fn path(n_sites: usize) -> Self {
        SiteGraph::new(n_sites, (1..n_sites).map(|i| (i - 1, i))).expect("path graph is valid")
    }

    /// Cycle over `n_sites >= 3` sites.
    pub fn cycle(n_sites: usize) -> Result<Self> {
        SiteGraph::new(n_sites, (0..n_sites).map(|i| (i, (i + 1) % n_sites)))
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> impl ExactSizeIterator<Item = (usize, usize)> + '_ {
        self.edges.iter().map(|&(a, b)| (a as usize, b as usize))
    }

    pub fn neighbours(&self, site: usize) -> &[u32] {
        let lo = self.offsets[site] as usize;
        let hi = self.offsets[site + 1] as usize;
        &self.neighbours[lo..hi]
    }

    pub fn degree(&self, site: usize) -> usize {
        (self.offsets[site + 1] - self.offsets[site]) as usize
    }

    pub fn max_degree(&self) -> usize {
        (0..self.n_sites).map(|i| self.degree(i)).max().unwrap_or(0)
    }
}

impl fmt::Debug for SiteGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SiteGraph")
            .field("n_sites", &self.n_sites)
            .field("edges", &self.edges)
            .finish()
    }
}

/// Family of the two toy models that admit closed-form normalising constants.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Bernoulli,
    Markov,
}

/// Sufficient statistic of one candidate model.
#[derive(Debug, Clone, PartialEq)]
pub enum Statistic {
    /// Number of sites labelled 1 (iid Bernoulli field).
    BernoulliCount,
    /// Number of consecutive equal pairs (two-state Markov chain).
    MarkovPersistence,
    /// Number of graph edges whose endpoints agree (Ising field).
    IsingMatch(Arc<SiteGraph>),
}

impl Statistic {
    /// Site count imposed by the statistic, if any.
    pub fn n_sites(&self) -> Option<usize> {
        match self {
            Statistic::IsingMatch(g) => Some(g.n_sites()),
            _ => None,
        }
    }

    /// Largest value the statistic can take on `n` sites.
    pub fn max_value(&self, n: usize) -> usize {
        match self {
            Statistic::BernoulliCount => n,
            Statistic::MarkovPersistence => n.saturating_sub(1),
            Statistic::IsingMatch(g) => g.n_edges(),
        }
    }

    pub fn evaluate(&self, x: &Configuration) -> Result<u32> {
        match self {
            Statistic::BernoulliCount => Ok(suff_stat_bernoulli(x)),
            Statistic::MarkovPersistence => Ok(suff_stat_markov(x)),
            Statistic::IsingMatch(g) => suff_stat_ising(x, g),
        }
    }

    /// Evaluate on a raw label slice whose length has already been checked.
    #[inline]
    pub(crate) fn evaluate_states(&self, x: &[u8]) -> u32 {
        match self {
            Statistic::BernoulliCount => bernoulli_count(x),
            Statistic::MarkovPersistence => markov_count(x),
            Statistic::IsingMatch(g) => ising_count(x, g),
        }
    }
}

/// One candidate model: a statistic plus a uniform prior on its parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    statistic: Statistic,
    prior_low: f64,
    prior_high: f64,
}

impl ModelSpec {
    pub fn new(statistic: Statistic, prior_low: f64, prior_high: f64) -> Result<Self> {
        if !(prior_low.is_finite() && prior_high.is_finite() && prior_low < prior_high) {
            return Err(Error::InvalidPrior {
                low: prior_low,
                high: prior_high,
            });
        }
        Ok(ModelSpec {
            statistic,
            prior_low,
            prior_high,
        })
    }

    /// Toy model 0: iid Bernoulli field with θ₀ ~ U(−5, 5).
    pub fn toy_bernoulli() -> Self {
        ModelSpec::new(Statistic::BernoulliCount, -5.0, 5.0).unwrap()
    }

    /// Toy model 1: persistent Markov chain with θ₁ ~ U(0, 6).
    pub fn toy_markov() -> Self {
        ModelSpec::new(Statistic::MarkovPersistence, 0.0, 6.0).unwrap()
    }

    pub fn ising(graph: Arc<SiteGraph>, prior_low: f64, prior_high: f64) -> Result<Self> {
        ModelSpec::new(Statistic::IsingMatch(graph), prior_low, prior_high)
    }

    pub fn statistic(&self) -> &Statistic {
        &self.statistic
    }

    pub fn prior_low(&self) -> f64 {
        self.prior_low
    }

    pub fn prior_high(&self) -> f64 {
        self.prior_high
    }
}

/// Concatenated statistics `(S_0(x), …, S_{M−1}(x))`, one per candidate model.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StatVector(Vec<u32>);

impl StatVector {
    pub fn new(values: Vec<u32>) -> Self {
        StatVector(values)
    }

    pub fn values(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl From<Vec<u32>> for StatVector {
    fn from(v: Vec<u32>) -> Self {
        StatVector(v)
    }
}

#[inline]
fn bernoulli_count(x: &[u8]) -> u32 {
    x.iter().map(|&s| s as u32).sum()
}

#[inline]
fn markov_count(x: &[u8]) -> u32 {
    x.windows(2).filter(|w| w[0] == w[1]).count() as u32
}

#[inline]
fn ising_count(x: &[u8], g: &SiteGraph) -> u32 {
    g.edges
        .iter()
        .filter(|&&(a, b)| x[a as usize] == x[b as usize])
        .count() as u32
}

pub fn suff_stat_bernoulli(x: &Configuration) -> u32 {
    bernoulli_count(x.states())
}

/// `#{i ≥ 2 : x_i = x_{i−1}}`; zero for a single site.
pub fn suff_stat_markov(x: &Configuration) -> u32 {
    markov_count(x.states())
}

pub fn suff_stat_ising(x: &Configuration, g: &SiteGraph) -> Result<u32> {
    if x.len() != g.n_sites() {
        return Err(Error::SiteCountMismatch {
            expected: g.n_sites(),
            found: x.len(),
        });
    }
    Ok(ising_count(x.states(), g))
}

/// Checks that every model can be evaluated on `n` sites.
pub fn check_site_count(models: &[ModelSpec], n: usize) -> Result<()> {
    if models.is_empty() {
        return Err(Error::NoModels);
    }
    for m in models {
        if let Some(expected) = m.statistic.n_sites() {
            if expected != n {
                return Err(Error::SiteCountMismatch { expected, found: n });
            }
        }
    }
    Ok(())
}

pub fn concat_stats(x: &Configuration, models: &[ModelSpec]) -> Result<StatVector> {
    check_site_count(models, x.len())?;
    Ok(StatVector(
        models
            .iter()
            .map(|m| m.statistic.evaluate_states(x.states()))
            .collect(),
    ))
}

/// `θ·S_m(x)`. The normalising constant is never touched.
pub fn log_unnorm_density(m: &ModelSpec, theta: f64, x: &Configuration) -> Result<f64> {
    Ok(theta * m.statistic.evaluate(x)? as f64)
}

/// Number of configurations on `n` sites taking each statistic value,
/// by full enumeration. Index `s` of the result counts `#{x : S(x) = s}`.
pub fn statistic_histogram(statistic: &Statistic, n: usize) -> Result<Vec<u64>> {
    if n > ENUMERATION_CAP {
        return Err(Error::EnumerationCap {
            sites: n,
            cap: ENUMERATION_CAP,
        });
    }
    if let Some(expected) = statistic.n_sites() {
        if expected != n {
            return Err(Error::SiteCountMismatch { expected, found: n });
        }
    }
    let mut hist = vec![0u64; statistic.max_value(n) + 1];
    let mut states = vec![0u8; n];
    for code in 0..(1u64 << n) {
        for (i, s) in states.iter_mut().enumerate() {
            *s = ((code >> i) & 1) as u8;
        }
        hist[statistic.evaluate_states(&states) as usize] += 1;
    }
    Ok(hist)
}

/// `ln Σ_x exp{θ·S(x)}` over all `2^n` configurations.
pub fn brute_force_ln_z(m: &ModelSpec, theta: f64, n: usize) -> Result<f64> {
    let hist = statistic_histogram(&m.statistic, n)?;
    Ok(log_sum_exp(
        hist.iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(s, &c)| libm::log(c as f64) + theta * s as f64),
    ))
}

/// Raw enumerated normalising constant (no initial-state factor for the
/// Markov model).
pub fn brute_force_z(m: &ModelSpec, theta: f64, n: usize) -> Result<f64> {
    brute_force_ln_z(m, theta, n).map(libm::exp)
}

/// `ln(1 + e^t)` without overflow.
pub fn softplus(t: f64) -> f64 {
    if t > 0.0 {
        t + libm::log1p(libm::exp(-t))
    } else {
        libm::log1p(libm::exp(t))
    }
}

/// `ln Z` for the toy models: `n·ln(1+e^θ)` (Bernoulli) or
/// `ln 2 + (n−1)·ln(1+e^θ)` (Markov).
pub fn closed_form_ln_z(kind: ModelKind, theta: f64, n: usize) -> f64 {
    match kind {
        ModelKind::Bernoulli => n as f64 * softplus(theta),
        ModelKind::Markov => core::f64::consts::LN_2 + n.saturating_sub(1) as f64 * softplus(theta),
    }
}

pub fn closed_form_z(kind: ModelKind, theta: f64, n: usize) -> f64 {
    libm::exp(closed_form_ln_z(kind, theta, n))
}

pub(crate) fn log_sum_exp(terms: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = terms.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + libm::log(terms.map(|t| libm::exp(t - max)).sum::<f64>())
}
