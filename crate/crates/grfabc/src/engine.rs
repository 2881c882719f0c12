//! Parallel execution of ABC-MC runs on a fixed-size worker pool.
//!
//! Proposal `i` always draws from stream `i` of the run seed, so results are
//! identical for any number of workers.

use grfabc_core::abc::{quantile_epsilon, Epsilon};
use grfabc_core::estimators::two_step_rho;
use grfabc_core::rng::derive_seed;
use grfabc_core::{AbcRun, ModelPrior, Simulator};
use rayon::prelude::*;
use rayon::{ThreadPool, ThreadPoolBuilder};

use crate::config::EpsilonMode;
use crate::error::{CliError, Result};

pub struct Engine {
    pool: ThreadPool,
}

/// A finished estimation run and how its tolerance was found.
#[derive(Debug, Clone)]
pub struct Estimation {
    pub run: AbcRun,
    /// Number of pilot proposals behind a quantile tolerance (0 otherwise).
    pub pilot_used: u64,
}

/// Both halves of a two-step run.
#[derive(Debug, Clone)]
pub struct TwoStep {
    pub first: Estimation,
    pub rho: f64,
    pub second: Estimation,
}

impl Engine {
    /// `None` sizes the pool to the number of logical cores.
    pub fn new(workers: Option<usize>) -> Result<Self> {
        let mut builder = ThreadPoolBuilder::new();
        if let Some(w) = workers {
            if w == 0 {
                return Err(CliError::Config("workers must be at least 1".into()));
            }
            builder = builder.num_threads(w);
        }
        Ok(Engine {
            pool: builder.build()?,
        })
    }

    pub fn workers(&self) -> usize {
        self.pool.current_num_threads()
    }

    /// Proposals `0..n_proposals` of `sim`, keeping those within `epsilon`.
    pub fn run(
        &self,
        sim: &Simulator,
        target_prior: ModelPrior,
        n_proposals: u64,
        epsilon: Epsilon,
    ) -> AbcRun {
        let accepted = self.pool.install(|| {
            (0..n_proposals)
                .into_par_iter()
                .map_init(
                    || sim.scratch(),
                    |scratch, i| sim.accept(i, epsilon, scratch),
                )
                .flatten_iter()
                .collect()
        });
        AbcRun::from_accepted(sim, target_prior, epsilon, n_proposals, accepted)
    }

    /// Sorted distances of a pilot drawn on its own seed, so the pilot and
    /// the estimation run never share a proposal.
    pub fn pilot(&self, sim: &Simulator, n_pilot: u64) -> Vec<f64> {
        let pilot = sim.reseeded(pilot_seed(sim.seed()));
        let mut d: Vec<f64> = self.pool.install(|| {
            (0..n_pilot)
                .into_par_iter()
                .map_init(|| pilot.scratch(), |scratch, i| pilot.distance(i, scratch))
                .collect()
        });
        d.par_sort_unstable_by(f64::total_cmp);
        d
    }

    /// Tolerance for `mode`, consulting a pilot when it is a quantile.
    pub fn resolve_epsilon(
        &self,
        sim: &Simulator,
        mode: EpsilonMode,
        n_pilot: u64,
    ) -> Result<Epsilon> {
        Ok(match mode {
            EpsilonMode::ExactZero => Epsilon::EXACT,
            EpsilonMode::Infinite => Epsilon::Infinite,
            EpsilonMode::Fixed(v) => Epsilon::finite(v)?,
            EpsilonMode::Quantile(q) => quantile_epsilon(&self.pilot(sim, n_pilot), q)?,
        })
    }

    /// One estimation run. With `reuse_pilot` a quantile tolerance is read
    /// off the run's own distances: every proposal is kept, then the run is
    /// restricted to the quantile.
    pub fn estimate(
        &self,
        sim: &Simulator,
        target_prior: ModelPrior,
        n_proposals: u64,
        mode: EpsilonMode,
        n_pilot: u64,
        reuse_pilot: bool,
    ) -> Result<Estimation> {
        if let (EpsilonMode::Quantile(q), true) = (mode, reuse_pilot) {
            let all = self.run(sim, target_prior, n_proposals, Epsilon::Infinite);
            let eps = quantile_epsilon(&all.sorted_distances(), q)?;
            return Ok(Estimation {
                run: all.restrict(eps)?,
                pilot_used: n_proposals,
            });
        }
        let epsilon = self.resolve_epsilon(sim, mode, n_pilot)?;
        let pilot_used = if matches!(mode, EpsilonMode::Quantile(_)) {
            n_pilot
        } else {
            0
        };
        Ok(Estimation {
            run: self.run(sim, target_prior, n_proposals, epsilon),
            pilot_used,
        })
    }

    /// Two-step scheme for two models: an equal-prior run of `first_budget`
    /// proposals picks the tilt `ρ`, then a second run of `second_budget`
    /// proposals draws model 1 with probability `ρ`. The second run's counts
    /// are the ones to reweight; the first run only chooses `ρ`.
    pub fn two_step(
        &self,
        sim: &Simulator,
        first_budget: u64,
        second_budget: u64,
        mode: EpsilonMode,
        n_pilot: u64,
        reuse_pilot: bool,
    ) -> Result<TwoStep> {
        let equal = ModelPrior::uniform(2);
        let first_sim = sim
            .reseeded(derive_seed(sim.seed(), "two-step", 1))
            .with_sampling_prior(equal.clone())?;
        let first = self.estimate(
            &first_sim,
            equal.clone(),
            first_budget,
            mode,
            n_pilot,
            reuse_pilot,
        )?;
        let rho = two_step_rho(&first.run.counts())?;
        let tilted = ModelPrior::tilted(rho)?;
        let second_sim = sim
            .reseeded(derive_seed(sim.seed(), "two-step", 2))
            .with_sampling_prior(tilted)?;
        // same tolerance as the first run, so both target one ABC posterior
        let run = self.run(&second_sim, equal, second_budget, first.run.epsilon);
        Ok(TwoStep {
            first,
            rho,
            second: Estimation { run, pilot_used: 0 },
        })
    }
}

pub fn pilot_seed(seed: u64) -> u64 {
    derive_seed(seed, "pilot", 0)
}
