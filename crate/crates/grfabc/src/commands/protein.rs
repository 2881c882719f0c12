use std::path::PathBuf;

use grfabc_core::estimators::bf_smoothed;
use grfabc_core::protein::{hydrophobicity_labels, AminoSequence, CandidateStructure};
use grfabc_core::rng::derive_seed;
use grfabc_core::{Configuration, ModelPrior, ModelSpec, Simulator};
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::Header;
use crate::config::RunConfig;
use crate::engine::Engine;
use crate::error::{CliError, Result};
use crate::formats::{
    ensure_dir, json_string, load_candidate, load_sequence, write_csv, write_text,
};

/// Uniform prior bounds on θ for every candidate structure.
pub const THETA_PRIOR: (f64, f64) = (0.0, 4.0);

#[derive(Debug, Clone, Default)]
pub struct ProteinArgs {
    pub sequence: PathBuf,
    /// `(name, graph file)` per candidate.
    pub graphs: Vec<(String, PathBuf)>,
    pub reference: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionRow {
    pub reference: String,
    pub candidate: String,
    pub bf: f64,
    pub log_bf: f64,
    pub category: String,
    pub n_reference: u64,
    pub n_candidate: u64,
    pub proposals: u64,
    pub epsilon: f64,
}

/// Seed of the run comparing `reference` with `candidate`; depends only on
/// the run seed and the two names, never on candidate order.
pub fn pair_seed(seed: u64, reference: &str, candidate: &str) -> u64 {
    derive_seed(seed, &format!("pair:{reference}/{candidate}"), 0)
}

/// Estimate `BF(reference / candidate)` for one pair.
pub fn compare_pair(
    cfg: &RunConfig,
    engine: &Engine,
    x0: &Configuration,
    reference: &CandidateStructure,
    candidate: &CandidateStructure,
) -> Result<SelectionRow> {
    let (low, high) = THETA_PRIOR;
    let models = vec![
        ModelSpec::ising(reference.graph.clone(), low, high)?,
        ModelSpec::ising(candidate.graph.clone(), low, high)?,
    ];
    let prior = ModelPrior::uniform(2);
    let sim = Simulator::new(
        models,
        prior.clone(),
        x0,
        cfg.sweeps,
        pair_seed(cfg.seed, &reference.name, &candidate.name),
    )?;
    let est = engine.estimate(
        &sim,
        prior.clone(),
        cfg.proposals,
        cfg.epsilon,
        cfg.pilot,
        cfg.reuse_pilot,
    )?;
    let counts = est.run.counts();
    let bf = bf_smoothed(&counts, &prior, cfg.log_base)?;
    Ok(SelectionRow {
        reference: reference.name.clone(),
        candidate: candidate.name.clone(),
        bf: bf.value,
        log_bf: cfg.log_base.log(bf.value),
        category: bf.jeffreys.as_str().to_string(),
        n_reference: counts.get(0),
        n_candidate: counts.get(1),
        proposals: cfg.proposals,
        epsilon: est.run.epsilon.value(),
    })
}

/// Rank candidates against the reference, largest `BF(ref/cand)` first.
pub fn select_structures(
    cfg: &RunConfig,
    engine: &Engine,
    seq: &AminoSequence,
    candidates: &[CandidateStructure],
    reference: &str,
) -> Result<Vec<SelectionRow>> {
    if candidates.len() < 2 {
        return Err(CliError::Config(
            "structure selection needs at least two candidates".into(),
        ));
    }
    for (i, c) in candidates.iter().enumerate() {
        if candidates[..i].iter().any(|o| o.name == c.name) {
            return Err(CliError::Config(format!(
                "candidate name {:?} is used twice",
                c.name
            )));
        }
        c.check_against(seq)
            .map_err(|e| CliError::Config(format!("candidate {}: {e}", c.name)))?;
    }
    let r = candidates
        .iter()
        .find(|c| c.name == reference)
        .ok_or_else(|| {
            CliError::Config(format!(
                "reference {reference:?} is not among the candidates"
            ))
        })?;
    let x0 = hydrophobicity_labels(seq);
    let mut rows = candidates
        .iter()
        .filter(|c| c.name != reference)
        .map(|c| compare_pair(cfg, engine, &x0, r, c))
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| {
        b.bf.total_cmp(&a.bf)
            .then_with(|| a.candidate.cmp(&b.candidate))
    });
    Ok(rows)
}

fn table(rows: &[SelectionRow], base: &str) -> String {
    let width = rows
        .iter()
        .map(|r| r.candidate.len())
        .max()
        .unwrap_or(0)
        .max("candidate".len());
    let mut out = format!(
        "{:<width$}  {:>12}  {:>10}  {:<16}  {:>8}  {:>8}\n",
        "candidate",
        "BF(ref/cand)",
        format!("log{base} BF"),
        "category",
        "n_ref",
        "n_cand"
    );
    for r in rows {
        out.push_str(&format!(
            "{:<width$}  {:>12.4}  {:>10.4}  {:<16}  {:>8}  {:>8}\n",
            r.candidate, r.bf, r.log_bf, r.category, r.n_reference, r.n_candidate
        ));
    }
    out
}

pub fn protein_select(cfg: &RunConfig, engine: &Engine, args: &ProteinArgs) -> Result<String> {
    cfg.validate()?;
    let seq = load_sequence(&args.sequence)?;
    if seq.is_empty() {
        return Err(CliError::Config(format!(
            "{}: empty sequence",
            args.sequence.display()
        )));
    }
    let candidates = args
        .graphs
        .iter()
        .map(|(name, path)| load_candidate(name, path))
        .collect::<Result<Vec<_>>>()?;
    let rows = select_structures(cfg, engine, &seq, &candidates, &args.reference)?;

    ensure_dir(&cfg.out_dir)?;
    write_csv(&cfg.out_dir.join("protein_select.csv"), &rows)?;
    let summary = json!({
        "header": Header::new("protein-select", cfg),
        "reference": args.reference,
        "sites": seq.len(),
        "theta_prior": [THETA_PRIOR.0, THETA_PRIOR.1],
        "rows": rows,
    });
    write_text(
        &cfg.out_dir.join("protein_summary.json"),
        &json_string(&summary)?,
    )?;
    let mut out = format!("reference {} ({} residues)\n", args.reference, seq.len());
    out.push_str(&table(&rows, cfg.log_base.as_str()));
    Ok(out)
}
