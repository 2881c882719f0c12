//! Rejection samplers: exact rejection on raw data and ABC model choice
//! (ABC-MC) on concatenated sufficient statistics.
//!
//! Proposal `i` of a run always draws from `RngStream::new(seed, i)`, so a
//! run is a pure function of its inputs and seed, whatever order or thread
//! the proposals are evaluated on. [`Simulator`] exposes the per-proposal
//! step so the std companion can drive it in parallel; [`abc_mc_run`] is
//! the sequential driver.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::estimators::ModelCounts;
use crate::grf::{check_site_count, concat_stats, Configuration, ModelSpec, StatVector};
use crate::rng::RngStream;
use crate::sampler::{sample_model_index, sample_prior_theta, simulate_into, ModelPrior};

/// Acceptance tolerance. A proposal is kept when `distance < ε`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Epsilon {
    Finite(f64),
    Infinite,
}

impl Epsilon {
    pub fn finite(value: f64) -> Result<Self> {
        if value.is_nan() || value < 0.0 {
            return Err(Error::InvalidEpsilon(value));
        }
        Ok(if value.is_infinite() {
            Epsilon::Infinite
        } else {
            Epsilon::Finite(value)
        })
    }

    /// Exact-match tolerance: with strict comparison only `distance = 0`
    /// would pass `< ε` for an infinitesimal ε, so zero is special-cased.
    pub const EXACT: Epsilon = Epsilon::Finite(0.0);

    #[inline]
    pub fn accepts(&self, distance: f64) -> bool {
        match *self {
            Epsilon::Infinite => true,
            Epsilon::Finite(e) if e == 0.0 => distance == 0.0,
            Epsilon::Finite(e) => distance < e,
        }
    }

    pub fn value(&self) -> f64 {
        match *self {
            Epsilon::Finite(e) => e,
            Epsilon::Infinite => f64::INFINITY,
        }
    }

    /// `self` is at least as permissive as `other`.
    pub fn covers(&self, other: &Epsilon) -> bool {
        self.value() >= other.value()
    }
}

impl fmt::Display for Epsilon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Epsilon::Infinite => f.write_str("inf"),
            Epsilon::Finite(e) => write!(f, "{e}"),
        }
    }
}

/// One simulated `(m*, θ*, S(x*))` triple and its distance to the data.
#[derive(Debug, Clone, PartialEq)]
pub struct Proposal {
    pub index: u64,
    pub model_index: usize,
    pub theta: f64,
    pub stats: StatVector,
    pub distance: f64,
}

/// Euclidean distance between two statistic vectors.
pub fn euclidean_distance(a: &StatVector, b: &StatVector) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch(a.len(), b.len()));
    }
    Ok(raw_distance(a.values(), b.values()))
}

#[inline]
fn raw_distance(a: &[u32], b: &[u32]) -> f64 {
    let sq: i64 = a
        .iter()
        .zip(b)
        .map(|(&x, &y)| {
            let d = x as i64 - y as i64;
            d * d
        })
        .sum();
    libm::sqrt(sq as f64)
}

/// Reusable buffers for one worker.
#[derive(Debug, Clone)]
pub struct ProposalScratch {
    x: Vec<u8>,
    stats: Vec<u32>,
}

/// Everything needed to draw proposal `i` of an ABC-MC run.
#[derive(Debug, Clone)]
pub struct Simulator {
    models: Vec<ModelSpec>,
    sampling_prior: ModelPrior,
    observed: StatVector,
    n_sites: usize,
    sweeps: usize,
    seed: u64,
}

impl Simulator {
    pub fn new(
        models: Vec<ModelSpec>,
        sampling_prior: ModelPrior,
        x0: &Configuration,
        sweeps: usize,
        seed: u64,
    ) -> Result<Self> {
        if x0.is_empty() {
            return Err(Error::EmptyConfiguration);
        }
        check_site_count(&models, x0.len())?;
        if sampling_prior.len() != models.len() {
            return Err(Error::ModelIndex {
                index: sampling_prior.len(),
                models: models.len(),
            });
        }
        let observed = concat_stats(x0, &models)?;
        Ok(Simulator {
            models,
            sampling_prior,
            observed,
            n_sites: x0.len(),
            sweeps,
            seed,
        })
    }

    pub fn models(&self) -> &[ModelSpec] {
        &self.models
    }

    pub fn observed(&self) -> &StatVector {
        &self.observed
    }

    pub fn sampling_prior(&self) -> &ModelPrior {
        &self.sampling_prior
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    /// Same simulator with a different seed.
    pub fn reseeded(&self, seed: u64) -> Self {
        Simulator {
            seed,
            ..self.clone()
        }
    }

    /// Same simulator drawing model indices from `prior`.
    pub fn with_sampling_prior(&self, prior: ModelPrior) -> Result<Self> {
        if prior.len() != self.models.len() {
            return Err(Error::ModelIndex {
                index: prior.len(),
                models: self.models.len(),
            });
        }
        Ok(Simulator {
            sampling_prior: prior,
            ..self.clone()
        })
    }

    pub fn scratch(&self) -> ProposalScratch {
        ProposalScratch {
            x: vec![0; self.n_sites],
            stats: vec![0; self.models.len()],
        }
    }

    /// Draw proposal `index`, leaving its statistics in `scratch`.
    /// Returns `(model index, θ, distance)`.
    pub fn draw(&self, index: u64, scratch: &mut ProposalScratch) -> (usize, f64, f64) {
        let mut rng = RngStream::new(self.seed, index);
        let m = sample_model_index(&self.sampling_prior, &mut rng);
        let model = &self.models[m];
        let theta = sample_prior_theta(model, &mut rng);
        simulate_into(model, theta, self.sweeps, &mut rng, &mut scratch.x);
        for (slot, spec) in scratch.stats.iter_mut().zip(&self.models) {
            *slot = spec.statistic().evaluate_states(&scratch.x);
        }
        let d = raw_distance(&scratch.stats, self.observed.values());
        (m, theta, d)
    }

    pub fn propose(&self, index: u64, scratch: &mut ProposalScratch) -> Proposal {
        let (model_index, theta, distance) = self.draw(index, scratch);
        Proposal {
            index,
            model_index,
            theta,
            stats: StatVector::new(scratch.stats.clone()),
            distance,
        }
    }

    /// Proposal `index` if it falls within `epsilon`.
    pub fn accept(
        &self,
        index: u64,
        epsilon: Epsilon,
        scratch: &mut ProposalScratch,
    ) -> Option<Proposal> {
        let (model_index, theta, distance) = self.draw(index, scratch);
        epsilon.accepts(distance).then(|| Proposal {
            index,
            model_index,
            theta,
            stats: StatVector::new(scratch.stats.clone()),
            distance,
        })
    }

    pub fn distance(&self, index: u64, scratch: &mut ProposalScratch) -> f64 {
        self.draw(index, scratch).2
    }
}

/// Output of one ABC-MC run.
#[derive(Debug, Clone, PartialEq)]
pub struct AbcRun {
    pub observed_stats: StatVector,
    pub epsilon: Epsilon,
    pub proposals_total: u64,
    pub accepted: Vec<Proposal>,
    pub sampling_prior: ModelPrior,
    pub target_prior: ModelPrior,
}

impl AbcRun {
    /// Assemble a run from accepted proposals produced in any order.
    pub fn from_accepted(
        sim: &Simulator,
        target_prior: ModelPrior,
        epsilon: Epsilon,
        proposals_total: u64,
        mut accepted: Vec<Proposal>,
    ) -> Self {
        accepted.sort_by_key(|p| p.index);
        AbcRun {
            observed_stats: sim.observed.clone(),
            epsilon,
            proposals_total,
            accepted,
            sampling_prior: sim.sampling_prior.clone(),
            target_prior,
        }
    }

    pub fn n_models(&self) -> usize {
        self.sampling_prior.len()
    }

    pub fn counts(&self) -> ModelCounts {
        let mut counts = vec![0u64; self.n_models()];
        for p in &self.accepted {
            counts[p.model_index] += 1;
        }
        ModelCounts::new(counts)
    }

    pub fn acceptance_rate(&self) -> f64 {
        if self.proposals_total == 0 {
            0.0
        } else {
            self.accepted.len() as f64 / self.proposals_total as f64
        }
    }

    /// The run that a tighter tolerance would have produced from the same
    /// proposals.
    pub fn restrict(&self, epsilon: Epsilon) -> Result<AbcRun> {
        if !self.epsilon.covers(&epsilon) {
            return Err(Error::InvalidEpsilon(epsilon.value()));
        }
        Ok(AbcRun {
            accepted: self
                .accepted
                .iter()
                .filter(|p| epsilon.accepts(p.distance))
                .cloned()
                .collect(),
            epsilon,
            ..self.clone()
        })
    }

    /// Ascending distances of the accepted proposals.
    pub fn sorted_distances(&self) -> Vec<f64> {
        let mut d: Vec<f64> = self.accepted.iter().map(|p| p.distance).collect();
        d.sort_by(f64::total_cmp);
        d
    }
}

/// ABC model choice: draw `m*` from the sampling prior, `θ*` from its
/// prior, `x*` from the model, and keep the triple when
/// `ρ(S(x0), S(x*)) < ε`.
///
/// `target_prior` is the prior the estimates refer to; it only differs from
/// `sampling_prior` in the reweighted two-step scheme.
#[allow(clippy::too_many_arguments)]
pub fn abc_mc_run(
    models: &[ModelSpec],
    target_prior: &ModelPrior,
    sampling_prior: &ModelPrior,
    x0: &Configuration,
    n_proposals: u64,
    epsilon: Epsilon,
    sweeps: usize,
    seed: u64,
) -> Result<AbcRun> {
    if models.is_empty() {
        return Err(Error::NoModels);
    }
    if target_prior.len() != models.len() {
        return Err(Error::ModelIndex {
            index: target_prior.len(),
            models: models.len(),
        });
    }
    let sim = Simulator::new(models.to_vec(), sampling_prior.clone(), x0, sweeps, seed)?;
    Ok(run_sequential(
        &sim,
        target_prior.clone(),
        n_proposals,
        epsilon,
    ))
}

pub fn run_sequential(
    sim: &Simulator,
    target_prior: ModelPrior,
    n_proposals: u64,
    epsilon: Epsilon,
) -> AbcRun {
    let mut scratch = sim.scratch();
    let accepted = (0..n_proposals)
        .filter_map(|i| sim.accept(i, epsilon, &mut scratch))
        .collect();
    AbcRun::from_accepted(sim, target_prior, epsilon, n_proposals, accepted)
}

/// Sorted distances of `n_pilot` proposals drawn exactly as in a run.
pub fn pilot_distances(sim: &Simulator, n_pilot: u64) -> Vec<f64> {
    let mut scratch = sim.scratch();
    let mut d: Vec<f64> = (0..n_pilot)
        .map(|i| sim.distance(i, &mut scratch))
        .collect();
    d.sort_by(f64::total_cmp);
    d
}

/// Nearest-rank quantile: element `⌈q·N⌉ − 1` of the ascending list.
pub fn select_epsilon(sorted_distances: &[f64], q: f64) -> Result<f64> {
    if !(q > 0.0 && q <= 1.0) {
        return Err(Error::InvalidQuantile(q));
    }
    if sorted_distances.is_empty() {
        return Err(Error::EmptyDistances);
    }
    let n = sorted_distances.len();
    let rank = libm::ceil(q * n as f64) as usize;
    Ok(sorted_distances[rank.clamp(1, n) - 1])
}

/// Tolerance that keeps every pilot distance at or below the `q`-quantile.
///
/// Distances between integer statistic vectors are discrete, so the strict
/// test `ρ < quantile` can discard the whole atom sitting at the quantile
/// (and everything when the quantile is 0). The next representable value
/// above the quantile makes the strict test equivalent to `ρ ≤ quantile`.
pub fn quantile_epsilon(sorted_distances: &[f64], q: f64) -> Result<Epsilon> {
    let value = select_epsilon(sorted_distances, q)?;
    Ok(Epsilon::Finite(next_up(value)))
}

fn next_up(x: f64) -> f64 {
    if x == 0.0 {
        f64::from_bits(1)
    } else {
        f64::from_bits(x.to_bits() + 1)
    }
}

/// Exact rejection for a single model on discrete data: keep `θ*` when the
/// simulated dataset equals `x0` site for site.
pub fn exact_rejection(
    model: &ModelSpec,
    x0: &Configuration,
    n_proposals: u64,
    sweeps: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    check_site_count(core::slice::from_ref(model), x0.len())?;
    let mut x = vec![0u8; x0.len()];
    let mut accepted = Vec::new();
    for i in 0..n_proposals {
        let mut rng = RngStream::new(seed, i);
        let theta = sample_prior_theta(model, &mut rng);
        simulate_into(model, theta, sweeps, &mut rng, &mut x);
        if x == x0.states() {
            accepted.push(theta);
        }
    }
    Ok(accepted)
}
