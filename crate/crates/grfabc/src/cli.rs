//! Command-line definition. Precedence, lowest first: built-in defaults,
//! the output-directory environment variable, `--config`, explicit flags.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::commands::{self, AbcRunArgs, ProteinArgs};
use crate::config::{RunConfig, OUT_DIR_ENV};
use crate::engine::Engine;
use crate::error::Result;
use crate::formats::parse_graph_arg;

#[derive(Debug, Parser)]
#[command(
    name = "grfabc",
    version,
    about = "ABC model choice between Gibbs random fields"
)]
pub struct Cli {
    #[command(flatten)]
    pub options: Options,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Default, Args)]
pub struct Options {
    /// Run seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Proposals per ABC run.
    #[arg(long, global = true)]
    pub proposals: Option<u64>,
    /// Tolerance: 0, inf, q:<frac> (pilot quantile) or v:<value>.
    #[arg(long, global = true)]
    pub epsilon: Option<String>,
    /// Pilot proposals for a quantile tolerance.
    #[arg(long, global = true)]
    pub pilot: Option<u64>,
    /// Gibbs sweeps per simulated Ising dataset.
    #[arg(long, global = true)]
    pub sweeps: Option<usize>,
    /// Toy experiment: datasets per model.
    #[arg(long, global = true)]
    pub datasets: Option<usize>,
    /// Toy experiment: sites per dataset.
    #[arg(long, global = true)]
    pub sites: Option<usize>,
    /// Worker threads (default: logical cores).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Tilted second run with the reweighted estimator.
    #[arg(long, global = true)]
    pub two_step: bool,
    /// Take a quantile tolerance from the run's own distances.
    #[arg(long, global = true)]
    pub reuse_pilot: bool,
    /// Logarithm base for reported Bayes factors: 10 or e.
    #[arg(long, global = true)]
    pub log_base: Option<String>,
    /// Output directory.
    #[arg(long, global = true, env = OUT_DIR_ENV)]
    pub out: Option<PathBuf>,
    /// Config file of `key = value` lines.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulated study of the Bernoulli versus Markov chain comparison.
    ToyExperiment,
    /// ABC model choice on one dataset.
    AbcRun(RunInputs),
    /// Rank candidate contact graphs for a protein sequence.
    ProteinSelect {
        /// Sequence file: one line of one-letter residue codes.
        #[arg(long)]
        sequence: PathBuf,
        /// Candidate contact graph as NAME=FILE (or FILE, named by its stem).
        #[arg(long = "graph", required = true)]
        graphs: Vec<String>,
        /// Name of the reference candidate.
        #[arg(long)]
        reference: String,
    },
    /// Pilot distances and the tolerance a quantile selects.
    PilotEpsilon(RunInputs),
}

#[derive(Debug, Args)]
pub struct RunInputs {
    /// Model file; repeat for each model.
    #[arg(long = "model", required = true)]
    pub models: Vec<PathBuf>,
    /// Data file of 0/1 site labels.
    #[arg(long)]
    pub data: PathBuf,
    /// Also write the JSON summary to this file.
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

impl RunInputs {
    fn to_args(&self) -> AbcRunArgs {
        AbcRunArgs {
            models: self.models.clone(),
            data: self.data.clone(),
            summary: self.summary.clone(),
        }
    }
}

impl Options {
    pub fn to_config(&self) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &self.config {
            cfg.apply_file(path)?;
        }
        macro_rules! copy {
            ($($field:ident),*) => {$(
                if let Some(v) = &self.$field {
                    cfg.$field = v.clone();
                }
            )*};
        }
        copy!(seed, proposals, pilot, sweeps, datasets, sites);
        if let Some(e) = &self.epsilon {
            cfg.set("epsilon", e)?;
        }
        if let Some(b) = &self.log_base {
            cfg.set("log-base", b)?;
        }
        if let Some(w) = self.workers {
            cfg.workers = Some(w);
        }
        if let Some(out) = &self.out {
            cfg.out_dir = out.clone();
        }
        cfg.two_step |= self.two_step;
        cfg.reuse_pilot |= self.reuse_pilot;
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Run a parsed command line; returns the text for stdout.
pub fn execute(cli: &Cli) -> Result<String> {
    let cfg = cli.options.to_config()?;
    let engine = Engine::new(cfg.workers)?;
    match &cli.command {
        Command::ToyExperiment => commands::toy_experiment(&cfg, &engine),
        Command::AbcRun(inputs) => commands::abc_run(&cfg, &engine, &inputs.to_args()),
        Command::PilotEpsilon(inputs) => commands::pilot_epsilon(&cfg, &engine, &inputs.to_args()),
        Command::ProteinSelect {
            sequence,
            graphs,
            reference,
        } => {
            let args = ProteinArgs {
                sequence: sequence.clone(),
                graphs: graphs.iter().map(|g| parse_graph_arg(g)).collect(),
                reference: reference.clone(),
            };
            commands::protein_select(&cfg, &engine, &args)
        }
    }
}
