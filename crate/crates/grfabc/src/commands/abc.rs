use std::path::PathBuf;

use grfabc_core::abc::{quantile_epsilon, select_epsilon};
use grfabc_core::estimators::{bf_plugin, bf_reweighted, bf_smoothed, posterior_prob_hat};
use grfabc_core::{AbcRun, Configuration, ModelPrior, Simulator};
use serde::Serialize;
use serde_json::{json, Value};

use super::{epsilon_json, EstimateReport, Header};
use crate::config::{EpsilonMode, RunConfig};
use crate::engine::Engine;
use crate::error::{CliError, Result};
use crate::formats::{json_string, load_data, load_model, write_text, NamedModel};

/// A two-step run spends `1 / TWO_STEP_FIRST_SHARE` of its proposals on the
/// equal-prior first run.
pub const TWO_STEP_FIRST_SHARE: u64 = 10;

/// Inputs of `abc-run` and `pilot-epsilon`.
#[derive(Debug, Clone, Default)]
pub struct AbcRunArgs {
    pub models: Vec<PathBuf>,
    pub data: PathBuf,
    /// Also write the summary here.
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct ModelEcho {
    name: String,
    statistic: &'static str,
    prior: [f64; 2],
}

fn load_inputs(args: &AbcRunArgs) -> Result<(Vec<NamedModel>, Configuration)> {
    if args.models.is_empty() {
        return Err(CliError::Config(
            "at least one --model file is required".into(),
        ));
    }
    let models = args
        .models
        .iter()
        .map(|p| load_model(p))
        .collect::<Result<Vec<_>>>()?;
    let data = load_data(&args.data)?;
    Ok((models, data))
}

fn model_echo(models: &[NamedModel]) -> Vec<ModelEcho> {
    models
        .iter()
        .map(|m| ModelEcho {
            name: m.name.clone(),
            statistic: match m.spec.statistic() {
                grfabc_core::Statistic::BernoulliCount => "bernoulli",
                grfabc_core::Statistic::MarkovPersistence => "markov",
                grfabc_core::Statistic::IsingMatch(_) => "ising",
            },
            prior: [m.spec.prior_low(), m.spec.prior_high()],
        })
        .collect()
}

fn simulator(cfg: &RunConfig, models: &[NamedModel], x0: &Configuration) -> Result<Simulator> {
    let specs = models.iter().map(|m| m.spec.clone()).collect();
    Ok(Simulator::new(
        specs,
        ModelPrior::uniform(models.len()),
        x0,
        cfg.sweeps,
        cfg.seed,
    )?)
}

/// Counts, posterior probabilities and the plug-in and smoothed estimates
/// for one run. Estimates need exactly two models; with no acceptances only
/// the smoothed one exists.
fn describe(run: &AbcRun, cfg: &RunConfig) -> Result<Value> {
    let counts = run.counts();
    let posterior: Option<Vec<f64>> = (counts.total() > 0)
        .then(|| {
            (0..counts.n_models())
                .map(|m| posterior_prob_hat(&counts, m))
                .collect()
        })
        .transpose()?;
    let mut estimates = Vec::new();
    if counts.n_models() == 2 {
        if let Ok(p) = bf_plugin(&counts, &run.target_prior, cfg.log_base) {
            estimates.push(EstimateReport::new(&p, cfg.log_base));
        }
        estimates.push(EstimateReport::new(
            &bf_smoothed(&counts, &run.target_prior, cfg.log_base)?,
            cfg.log_base,
        ));
    }
    Ok(json!({
        "epsilon": epsilon_json(run.epsilon),
        "proposals": run.proposals_total,
        "accepted": counts.total(),
        "no_acceptances": counts.total() == 0,
        "acceptance_rate": run.acceptance_rate(),
        "sampling_prior": run.sampling_prior.weights(),
        "counts": counts.as_slice(),
        "posterior": posterior,
        "estimates": estimates,
    }))
}

/// Run ABC model choice on one dataset and report the result as JSON.
pub fn abc_run(cfg: &RunConfig, engine: &Engine, args: &AbcRunArgs) -> Result<String> {
    cfg.validate()?;
    let (models, x0) = load_inputs(args)?;
    let sim = simulator(cfg, &models, &x0)?;
    let mut summary = json!({
        "header": Header::new("abc-run", cfg),
        "models": model_echo(&models),
        "n_sites": x0.len(),
        "observed_stats": sim.observed().values(),
    });
    if cfg.two_step {
        if models.len() != 2 {
            return Err(CliError::Config(format!(
                "two-step runs compare exactly two models, got {}",
                models.len()
            )));
        }
        // the first run only has to pick ρ; most of the budget goes to the second
        let first_budget = cfg.proposals / TWO_STEP_FIRST_SHARE;
        let two = engine.two_step(
            &sim,
            first_budget,
            cfg.proposals - first_budget,
            cfg.epsilon,
            cfg.pilot,
            cfg.reuse_pilot,
        )?;
        let mut second = describe(&two.second.run, cfg)?;
        let reweighted = bf_reweighted(&two.second.run.counts(), two.rho, cfg.log_base)?;
        second["estimates"] = json!([EstimateReport::new(&reweighted, cfg.log_base)]);
        summary["first_run"] = describe(&two.first.run, cfg)?;
        summary["rho"] = json!(two.rho);
        summary["second_run"] = second;
    } else {
        let est = engine.estimate(
            &sim,
            ModelPrior::uniform(models.len()),
            cfg.proposals,
            cfg.epsilon,
            cfg.pilot,
            cfg.reuse_pilot,
        )?;
        summary["run"] = describe(&est.run, cfg)?;
        summary["pilot"] = json!(est.pilot_used);
    }
    let text = json_string(&summary)?;
    if let Some(path) = &args.summary {
        write_text(path, &text)?;
    }
    Ok(text)
}

/// Pilot distances and the tolerance a quantile would select.
pub fn pilot_epsilon(cfg: &RunConfig, engine: &Engine, args: &AbcRunArgs) -> Result<String> {
    cfg.validate()?;
    let EpsilonMode::Quantile(q) = cfg.epsilon else {
        return Err(CliError::Config(format!(
            "pilot-epsilon needs a quantile tolerance (q:<frac>), got {}",
            cfg.epsilon
        )));
    };
    let (models, x0) = load_inputs(args)?;
    let sim = simulator(cfg, &models, &x0)?;
    let distances = engine.pilot(&sim, cfg.pilot);
    let at = select_epsilon(&distances, q)?;
    let eps = quantile_epsilon(&distances, q)?;
    let ladder: Vec<Value> = [0.001, 0.01, 0.05, 0.1, 0.25, 0.5, 1.0]
        .into_iter()
        .map(|p| Ok(json!({ "quantile": p, "distance": select_epsilon(&distances, p)? })))
        .collect::<Result<_>>()?;
    let summary = json!({
        "header": Header::new("pilot-epsilon", cfg),
        "models": model_echo(&models),
        "pilot": cfg.pilot,
        "quantile": q,
        "distance_at_quantile": at,
        "epsilon": epsilon_json(eps),
        "distance_quantiles": ladder,
    });
    let text = json_string(&summary)?;
    if let Some(path) = &args.summary {
        write_text(path, &text)?;
    }
    Ok(text)
}
