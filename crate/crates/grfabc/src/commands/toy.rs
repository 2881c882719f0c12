use std::collections::BTreeMap;

use grfabc_core::estimators::{bf_plugin, bf_smoothed, JeffreysCategory};
use grfabc_core::grf::{suff_stat_bernoulli, suff_stat_markov};
use grfabc_core::rng::derive_seed;
use grfabc_core::sampler::{sample_prior_theta, simulate};
use grfabc_core::{AbcRun, Epsilon, ModelPrior, ModelSpec, RngStream, Simulator};
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{category_from_ln, Header};
use crate::config::RunConfig;
use crate::engine::Engine;
use crate::error::Result;
use crate::formats::{ensure_dir, json_string, write_csv, write_text};
use crate::oracle::OracleCache;

/// One dataset at one tolerance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToyRow {
    pub dataset: u64,
    pub true_model: u8,
    pub theta: f64,
    pub s0: u32,
    pub s1: u32,
    pub exact_p0: f64,
    pub exact_log_bf: f64,
    pub exact_category: String,
    /// `0` or the configured tolerance mode.
    pub epsilon_mode: String,
    pub epsilon: f64,
    pub proposals: u64,
    pub accepted: u64,
    pub n0: u64,
    pub n1: u64,
    pub p0_hat: Option<f64>,
    pub bf_plugin: Option<f64>,
    pub bf_smoothed: f64,
    pub log_bf_smoothed: f64,
    pub category_smoothed: String,
    /// Smoothed estimate over the exact Bayes factor.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcceptanceRow {
    pub dataset: u64,
    pub true_model: u8,
    pub proposals: u64,
    pub accepted_exact: u64,
    pub accepted_tolerance: u64,
    pub epsilon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioQuantiles {
    pub epsilon_mode: String,
    pub datasets: u64,
    pub q25: f64,
    pub q50: f64,
    pub q75: f64,
}

/// Linear-interpolation sample quantile of ascending `sorted`.
pub fn quantile_type7(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Counts indexed `[exact rank][estimated rank]`.
pub fn confusion_matrix(rows: &[&ToyRow]) -> [[u64; 8]; 8] {
    let rank = |s: &str| {
        s.parse::<JeffreysCategory>()
            .map(|c| c.rank())
            .expect("category written by us")
    };
    let mut m = [[0u64; 8]; 8];
    for r in rows {
        m[rank(&r.exact_category)][rank(&r.category_smoothed)] += 1;
    }
    m
}

fn confusion_csv(m: &[[u64; 8]; 8]) -> String {
    let mut out = String::from("exact");
    for c in JeffreysCategory::ALL {
        out.push(',');
        out.push_str(c.as_str());
    }
    out.push('\n');
    for (c, row) in JeffreysCategory::ALL.iter().zip(m) {
        out.push_str(c.as_str());
        for v in row {
            out.push_str(&format!(",{v}"));
        }
        out.push('\n');
    }
    out
}

struct Agreement {
    diagonal: f64,
    within_one: f64,
}

fn agreement(m: &[[u64; 8]; 8]) -> Agreement {
    let total: u64 = m.iter().flatten().sum();
    let mut diagonal = 0;
    let mut within_one = 0;
    for (i, row) in m.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            if i == j {
                diagonal += v;
            }
            if i.abs_diff(j) <= 1 {
                within_one += v;
            }
        }
    }
    let frac = |k: u64| {
        if total == 0 {
            f64::NAN
        } else {
            k as f64 / total as f64
        }
    };
    Agreement {
        diagonal: frac(diagonal),
        within_one: frac(within_one),
    }
}

struct Dataset {
    id: u64,
    true_model: u8,
    theta: f64,
    x0: grfabc_core::Configuration,
}

fn simulate_dataset(
    cfg: &RunConfig,
    models: &[ModelSpec],
    id: u64,
    true_model: u8,
) -> Result<Dataset> {
    let mut rng = RngStream::new(derive_seed(cfg.seed, "toy-data", id), 0);
    let spec = &models[true_model as usize];
    let theta = sample_prior_theta(spec, &mut rng);
    let x0 = simulate(spec, theta, cfg.sites, cfg.sweeps, &mut rng)?;
    Ok(Dataset {
        id,
        true_model,
        theta,
        x0,
    })
}

fn row(
    cfg: &RunConfig,
    d: &Dataset,
    exact: &grfabc_core::toy::ToyPosterior,
    mode: String,
    run: &AbcRun,
) -> Result<ToyRow> {
    let counts = run.counts();
    let prior = &run.target_prior;
    let smoothed = bf_smoothed(&counts, prior, cfg.log_base)?;
    let plugin = bf_plugin(&counts, prior, cfg.log_base)
        .ok()
        .map(|e| e.value);
    let total = counts.total();
    Ok(ToyRow {
        dataset: d.id,
        true_model: d.true_model,
        theta: d.theta,
        s0: suff_stat_bernoulli(&d.x0),
        s1: suff_stat_markov(&d.x0),
        exact_p0: exact.p0,
        exact_log_bf: super::log_from_ln(cfg.log_base, exact.ln_bf),
        exact_category: category_from_ln(cfg.log_base, exact.ln_bf).to_string(),
        epsilon_mode: mode,
        epsilon: run.epsilon.value(),
        proposals: run.proposals_total,
        accepted: total,
        n0: counts.get(0),
        n1: counts.get(1),
        p0_hat: (total > 0).then(|| counts.get(0) as f64 / total as f64),
        bf_plugin: plugin,
        bf_smoothed: smoothed.value,
        log_bf_smoothed: cfg.log_base.log(smoothed.value),
        category_smoothed: smoothed.jeffreys.as_str().to_string(),
        ratio: (smoothed.value.ln() - exact.ln_bf).exp(),
    })
}

/// Simulate `datasets` sequences under each toy model, compare ABC
/// estimates at ε = 0 and at the configured tolerance with the exact
/// posterior, and write per-dataset rows plus summary tables.
pub fn toy_experiment(cfg: &RunConfig, engine: &Engine) -> Result<String> {
    cfg.validate()?;
    let models = vec![ModelSpec::toy_bernoulli(), ModelSpec::toy_markov()];
    let prior = ModelPrior::uniform(2);
    let oracle = OracleCache::new();
    let per_model = cfg.datasets as u64;
    let tolerance_label = cfg.epsilon.to_string();

    let mut rows = Vec::with_capacity(4 * cfg.datasets);
    let mut acceptance = Vec::with_capacity(2 * cfg.datasets);
    for id in 0..2 * per_model {
        let d = simulate_dataset(cfg, &models, id, (id / per_model) as u8)?;
        let exact = oracle.posterior(&d.x0, &prior)?;
        let sim = Simulator::new(
            models.clone(),
            prior.clone(),
            &d.x0,
            cfg.sweeps,
            derive_seed(cfg.seed, "toy-abc", id),
        )?;
        let wide = engine
            .estimate(
                &sim,
                prior.clone(),
                cfg.proposals,
                cfg.epsilon,
                cfg.pilot,
                cfg.reuse_pilot,
            )?
            .run;
        // one set of proposals serves both tolerances when it can
        let exact_run = if wide.epsilon.covers(&Epsilon::EXACT) {
            wide.restrict(Epsilon::EXACT)?
        } else {
            engine.run(&sim, prior.clone(), cfg.proposals, Epsilon::EXACT)
        };
        acceptance.push(AcceptanceRow {
            dataset: id,
            true_model: d.true_model,
            proposals: cfg.proposals,
            accepted_exact: exact_run.accepted.len() as u64,
            accepted_tolerance: wide.accepted.len() as u64,
            epsilon: wide.epsilon.value(),
        });
        rows.push(row(cfg, &d, &exact, "0".into(), &exact_run)?);
        rows.push(row(cfg, &d, &exact, tolerance_label.clone(), &wide)?);
    }

    ensure_dir(&cfg.out_dir)?;
    write_csv(&cfg.out_dir.join("toy_datasets.csv"), &rows)?;
    write_csv(&cfg.out_dir.join("toy_acceptance.csv"), &acceptance)?;

    let mut quantiles = Vec::new();
    let mut per_mode = BTreeMap::new();
    let mut report = String::new();
    report.push_str(&format!(
        "toy experiment: {} datasets ({} per model), {} sites, {} proposals each\n",
        2 * per_model,
        per_model,
        cfg.sites,
        cfg.proposals
    ));
    for (slot, (label, file)) in [
        ("0", "confusion_eps0.csv"),
        (tolerance_label.as_str(), "confusion_tolerance.csv"),
    ]
    .into_iter()
    .enumerate()
    {
        let selected: Vec<&ToyRow> = rows.iter().skip(slot).step_by(2).collect();
        let matrix = confusion_matrix(&selected);
        write_text(&cfg.out_dir.join(file), &confusion_csv(&matrix))?;
        let mut ratios: Vec<f64> = selected.iter().map(|r| r.ratio).collect();
        ratios.sort_by(f64::total_cmp);
        let q = RatioQuantiles {
            epsilon_mode: label.to_string(),
            datasets: ratios.len() as u64,
            q25: quantile_type7(&ratios, 0.25),
            q50: quantile_type7(&ratios, 0.5),
            q75: quantile_type7(&ratios, 0.75),
        };
        let agree = agreement(&matrix);
        let accepted: u64 = selected.iter().map(|r| r.accepted).sum();
        let empty = selected.iter().filter(|r| r.accepted == 0).count();
        report.push_str(&format!(
            "epsilon {label}: ratio quartiles {:.4} / {:.4} / {:.4}, diagonal {:.1}%, within one category {:.1}%, mean acceptances {:.1}\n",
            q.q25,
            q.q50,
            q.q75,
            100.0 * agree.diagonal,
            100.0 * agree.within_one,
            accepted as f64 / selected.len().max(1) as f64,
        ));
        per_mode.insert(
            if slot == 0 { "exact" } else { "tolerance" },
            json!({
                "epsilon_mode": label,
                "ratio_q25": q.q25,
                "ratio_median": q.q50,
                "ratio_q75": q.q75,
                "diagonal": agree.diagonal,
                "within_one_category": agree.within_one,
                "mean_accepted": accepted as f64 / selected.len().max(1) as f64,
                "datasets_without_acceptances": empty,
                "confusion": matrix,
            }),
        );
        quantiles.push(q);
    }
    write_csv(&cfg.out_dir.join("toy_ratio_quantiles.csv"), &quantiles)?;
    let summary = json!({
        "header": Header::new("toy-experiment", cfg),
        "rows": rows.len(),
        "results": per_mode,
        "files": ["toy_datasets.csv", "toy_acceptance.csv", "confusion_eps0.csv", "confusion_tolerance.csv", "toy_ratio_quantiles.csv"],
    });
    write_text(
        &cfg.out_dir.join("toy_summary.json"),
        &json_string(&summary)?,
    )?;
    report.push_str(&format!(
        "wrote {} rows to toy_datasets.csv and summaries to toy_summary.json\n",
        rows.len()
    ));
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn type7_quantiles() {
        let x = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile_type7(&x, 0.5), 2.5);
        assert_eq!(quantile_type7(&x, 0.25), 1.75);
        assert_eq!(quantile_type7(&x, 1.0), 4.0);
        assert_eq!(quantile_type7(&[7.0], 0.3), 7.0);
        assert!(quantile_type7(&[], 0.5).is_nan());
    }

    #[test]
    fn agreement_counts_bands() {
        let mut m = [[0u64; 8]; 8];
        m[3][3] = 6;
        m[3][4] = 2;
        m[0][7] = 2;
        let a = agreement(&m);
        assert_eq!(a.diagonal, 0.6);
        assert_eq!(a.within_one, 0.8);
    }
}
