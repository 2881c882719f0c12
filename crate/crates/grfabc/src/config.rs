//! Run configuration: defaults, `key = value` config files and validation.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use grfabc_core::LogBase;

use crate::error::{CliError, Result};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "GRFABC_OUT_DIR";
pub const DEFAULT_OUT_DIR: &str = "grfabc-out";

/// Smallest pilot that can resolve a quantile tolerance.
pub const MIN_PILOT: u64 = 100;

/// How the acceptance tolerance is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EpsilonMode {
    /// Accept only exact statistic matches.
    ExactZero,
    /// Nearest-rank quantile of pilot distances.
    Quantile(f64),
    /// A fixed tolerance.
    Fixed(f64),
    /// Accept everything (prior recovery).
    Infinite,
}

impl FromStr for EpsilonMode {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || {
            CliError::Config(format!(
                "epsilon {s:?}: expected 0, inf, q:<frac> or v:<val>"
            ))
        };
        let number = |v: &str| v.parse::<f64>().map_err(|_| bad());
        match s.trim() {
            "0" => Ok(EpsilonMode::ExactZero),
            "inf" => Ok(EpsilonMode::Infinite),
            other => {
                if let Some(q) = other.strip_prefix("q:") {
                    Ok(EpsilonMode::Quantile(number(q)?))
                } else if let Some(v) = other.strip_prefix("v:") {
                    Ok(EpsilonMode::Fixed(number(v)?))
                } else {
                    Err(bad())
                }
            }
        }
    }
}

impl fmt::Display for EpsilonMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EpsilonMode::ExactZero => f.write_str("0"),
            EpsilonMode::Quantile(q) => write!(f, "q:{q}"),
            EpsilonMode::Fixed(v) => write!(f, "v:{v}"),
            EpsilonMode::Infinite => f.write_str("inf"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub proposals: u64,
    pub epsilon: EpsilonMode,
    pub pilot: u64,
    pub sweeps: usize,
    /// Toy experiment: datasets simulated under each model.
    pub datasets: usize,
    /// Toy experiment: sequence length.
    pub sites: usize,
    /// Worker threads; `None` uses every logical core.
    pub workers: Option<usize>,
    pub two_step: bool,
    /// Take the quantile tolerance from the estimation run's own distances
    /// instead of a separate pilot.
    pub reuse_pilot: bool,
    pub log_base: LogBase,
    pub out_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 1,
            proposals: 200_000,
            epsilon: EpsilonMode::Quantile(0.01),
            pilot: 10_000,
            sweeps: grfabc_core::sampler::DEFAULT_SWEEPS,
            datasets: 100,
            sites: 50,
            workers: None,
            two_step: false,
            reuse_pilot: false,
            log_base: LogBase::Ten,
            out_dir: std::env::var_os(OUT_DIR_ENV)
                .map(PathBuf::from)
                .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR)),
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| CliError::Config(format!("{key} = {value:?} is not valid")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.trim() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(CliError::Config(format!(
            "{key} = {value:?} is not a boolean"
        ))),
    }
}

impl RunConfig {
    /// Set one option by its config-file / flag name.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key.trim() {
            "seed" => self.seed = parse(key, value)?,
            "proposals" => self.proposals = parse(key, value)?,
            "epsilon" => self.epsilon = value.parse()?,
            "pilot" => self.pilot = parse(key, value)?,
            "sweeps" => self.sweeps = parse(key, value)?,
            "datasets" => self.datasets = parse(key, value)?,
            "sites" => self.sites = parse(key, value)?,
            "workers" => self.workers = Some(parse(key, value)?),
            "two-step" => self.two_step = parse_bool(key, value)?,
            "reuse-pilot" => self.reuse_pilot = parse_bool(key, value)?,
            "log-base" => {
                self.log_base = value.trim().parse().map_err(|_| {
                    CliError::Config(format!("log-base = {value:?}: expected 10 or e"))
                })?
            }
            "out" => self.out_dir = PathBuf::from(value.trim()),
            other => return Err(CliError::Config(format!("unknown option {other:?}"))),
        }
        Ok(())
    }

    /// Apply a `key = value` file; `#` starts a comment.
    pub fn apply_str(&mut self, text: &str, origin: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| CliError::Format {
                path: origin.to_string(),
                line: i + 1,
                message: "expected key = value".into(),
            })?;
            self.set(key, value).map_err(|e| CliError::Format {
                path: origin.to_string(),
                line: i + 1,
                message: e.to_string(),
            })?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        self.apply_str(&text, &path.display().to_string())
    }

    pub fn validate(&self) -> Result<()> {
        match self.epsilon {
            EpsilonMode::Quantile(q) => {
                if !(q > 0.0 && q <= 1.0) {
                    return Err(CliError::Config(format!("quantile {q} must lie in (0, 1]")));
                }
                if self.pilot < MIN_PILOT && !self.reuse_pilot {
                    return Err(CliError::Config(format!(
                        "pilot size {} is below {MIN_PILOT} for a quantile tolerance",
                        self.pilot
                    )));
                }
            }
            EpsilonMode::Fixed(v) if !(v >= 0.0) => {
                return Err(CliError::Config(format!(
                    "fixed epsilon {v} must be non-negative"
                )));
            }
            _ => {}
        }
        if self.workers == Some(0) {
            return Err(CliError::Config("workers must be at least 1".into()));
        }
        Ok(())
    }

    /// Options that determine results, for echoing into summaries. Worker
    /// count and output location are left out: they never change results.
    pub fn echo(&self) -> BTreeMap<&'static str, String> {
        BTreeMap::from([
            ("seed", self.seed.to_string()),
            ("proposals", self.proposals.to_string()),
            ("epsilon", self.epsilon.to_string()),
            ("pilot", self.pilot.to_string()),
            ("sweeps", self.sweeps.to_string()),
            ("datasets", self.datasets.to_string()),
            ("sites", self.sites.to_string()),
            ("two-step", self.two_step.to_string()),
            ("reuse-pilot", self.reuse_pilot.to_string()),
            ("log-base", self.log_base.as_str().to_string()),
        ])
    }
}
