//! Forward simulation from priors and from each candidate model.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::grf::{Configuration, ModelSpec, SiteGraph, Statistic};

/// Number of full Gibbs sweeps used when nothing else is configured.
pub const DEFAULT_SWEEPS: usize = 1000;

/// Distribution over model indices.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelPrior {
    weights: Vec<f64>,
}

impl ModelPrior {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        let sum: f64 = weights.iter().sum();
        if weights.is_empty()
            || weights.iter().any(|w| !(w.is_finite() && *w >= 0.0))
            || (sum - 1.0).abs() > 1e-12
        {
            return Err(Error::InvalidModelPrior { sum });
        }
        Ok(ModelPrior { weights })
    }

    pub fn uniform(models: usize) -> Self {
        ModelPrior {
            weights: vec![1.0 / models as f64; models],
        }
    }

    /// Two-model prior putting mass `rho` on model 1.
    pub fn tilted(rho: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&rho) {
            return Err(Error::InvalidProbability(rho));
        }
        ModelPrior::new(vec![1.0 - rho, rho])
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, m: usize) -> f64 {
        self.weights[m]
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

#[inline]
pub fn logistic(t: f64) -> f64 {
    1.0 / (1.0 + libm::exp(-t))
}

pub fn sample_prior_theta<R: Rng + ?Sized>(m: &ModelSpec, rng: &mut R) -> f64 {
    let u: f64 = rng.random();
    m.prior_low() + (m.prior_high() - m.prior_low()) * u
}

pub fn sample_model_index<R: Rng + ?Sized>(prior: &ModelPrior, rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut cumulative = 0.0;
    for (m, &w) in prior.weights.iter().enumerate() {
        cumulative += w;
        if u < cumulative {
            return m;
        }
    }
    // rounding left u above the final cumulative sum; take the last
    // model with positive weight
    prior.weights.iter().rposition(|&w| w > 0.0).unwrap_or(0)
}

/// Fill `x` with iid sites, `P(x_i = 1) = e^θ / (1 + e^θ)`.
pub fn fill_bernoulli<R: Rng + ?Sized>(theta: f64, rng: &mut R, x: &mut [u8]) {
    let p = logistic(theta);
    for s in x.iter_mut() {
        *s = (rng.random::<f64>() < p) as u8;
    }
}

/// Fill `x` with a two-state chain: uniform first site, then each site
/// repeats its predecessor with probability `e^θ / (1 + e^θ)`.
pub fn fill_markov<R: Rng + ?Sized>(theta: f64, rng: &mut R, x: &mut [u8]) {
    if x.is_empty() {
        return;
    }
    let stay = logistic(theta);
    x[0] = (rng.random::<f64>() < 0.5) as u8;
    for i in 1..x.len() {
        let keep = rng.random::<f64>() < stay;
        x[i] = if keep { x[i - 1] } else { 1 - x[i - 1] };
    }
}

/// Systematic-scan Gibbs sampler for the Ising field on `g`, started from a
/// uniform random labelling.
///
/// Site `i` is resampled from `P(x_i = s | rest) ∝ exp(θ·#{j ~ i : x_j = s})`.
pub fn fill_gibbs_ising<R: Rng + ?Sized>(
    g: &SiteGraph,
    theta: f64,
    sweeps: usize,
    rng: &mut R,
    x: &mut [u8],
) {
    debug_assert_eq!(x.len(), g.n_sites());
    for s in x.iter_mut() {
        *s = (rng.random::<f64>() < 0.5) as u8;
    }
    let max_deg = g.max_degree() as i64;
    // P(x_i = 1) indexed by (#zero neighbours − #one neighbours) + max_deg
    let p_one: Vec<f64> = (-max_deg..=max_deg)
        .map(|d| logistic(-theta * d as f64))
        .collect();
    for _ in 0..sweeps {
        for i in 0..x.len() {
            let nb = g.neighbours(i);
            let ones: i64 = nb.iter().map(|&j| x[j as usize] as i64).sum();
            let diff = nb.len() as i64 - 2 * ones;
            let p = p_one[(diff + max_deg) as usize];
            x[i] = (rng.random::<f64>() < p) as u8;
        }
    }
}

pub fn sample_bernoulli_grf<R: Rng + ?Sized>(theta0: f64, n: usize, rng: &mut R) -> Configuration {
    let mut x = vec![0u8; n];
    fill_bernoulli(theta0, rng, &mut x);
    Configuration::from_raw(x)
}

pub fn sample_markov_grf<R: Rng + ?Sized>(theta1: f64, n: usize, rng: &mut R) -> Configuration {
    let mut x = vec![0u8; n];
    fill_markov(theta1, rng, &mut x);
    Configuration::from_raw(x)
}

pub fn gibbs_sample_ising<R: Rng + ?Sized>(
    g: &SiteGraph,
    theta: f64,
    sweeps: usize,
    rng: &mut R,
) -> Configuration {
    let mut x = vec![0u8; g.n_sites()];
    fill_gibbs_ising(g, theta, sweeps, rng, &mut x);
    Configuration::from_raw(x)
}

/// Draw a dataset of `x.len()` sites from model `m` at parameter `theta`.
/// `sweeps` only affects Ising models.
pub fn simulate_into<R: Rng + ?Sized>(
    m: &ModelSpec,
    theta: f64,
    sweeps: usize,
    rng: &mut R,
    x: &mut [u8],
) {
    match m.statistic() {
        Statistic::BernoulliCount => fill_bernoulli(theta, rng, x),
        Statistic::MarkovPersistence => fill_markov(theta, rng, x),
        Statistic::IsingMatch(g) => fill_gibbs_ising(g, theta, sweeps, rng, x),
    }
}

pub fn simulate<R: Rng + ?Sized>(
    m: &ModelSpec,
    theta: f64,
    n: usize,
    sweeps: usize,
    rng: &mut R,
) -> Result<Configuration> {
    if let Some(expected) = m.statistic().n_sites() {
        if expected != n {
            return Err(Error::SiteCountMismatch { expected, found: n });
        }
    }
    let mut x = vec![0u8; n];
    simulate_into(m, theta, sweeps, rng, &mut x);
    Ok(Configuration::from_raw(x))
}
