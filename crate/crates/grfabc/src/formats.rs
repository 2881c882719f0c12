//! Input file parsers and result writers.
//!
//! Contact graphs are edge lists: the first content line holds the site
//! count and every following content line two 0-based site indices. `#`
//! starts a comment in every text format read here.

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use grfabc_core::protein::{AminoSequence, CandidateStructure};
use grfabc_core::{Configuration, ModelSpec, SiteGraph, Statistic};
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{CliError, Result};

/// Text with comments removed, as `(1-based line number, content)` pairs
/// for the non-blank lines.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let line = raw.split('#').next().unwrap_or("").trim();
        (!line.is_empty()).then_some((i + 1, line))
    })
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn format_error(origin: &str, line: usize, message: impl Into<String>) -> CliError {
    CliError::Format {
        path: origin.to_string(),
        line,
        message: message.into(),
    }
}

pub fn parse_contact_graph(text: &str, origin: &str) -> Result<SiteGraph> {
    let mut lines = content_lines(text);
    let (first, header) = lines
        .next()
        .ok_or_else(|| format_error(origin, 1, "missing site count"))?;
    let n_sites: usize = header.parse().map_err(|_| {
        format_error(
            origin,
            first,
            format!("site count {header:?} is not a number"),
        )
    })?;
    let mut seen = HashSet::new();
    let mut edges = Vec::new();
    for (line, content) in lines {
        let fields: Vec<&str> = content.split_whitespace().collect();
        let [a, b] = fields[..] else {
            return Err(format_error(origin, line, "expected two site indices"));
        };
        let index = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| format_error(origin, line, format!("{s:?} is not a site index")))
        };
        let (a, b) = (index(a)?, index(b)?);
        if a == b {
            return Err(format_error(origin, line, format!("self-loop at site {a}")));
        }
        if a >= n_sites || b >= n_sites {
            return Err(format_error(
                origin,
                line,
                format!("edge ({a}, {b}) is out of range for {n_sites} sites"),
            ));
        }
        if !seen.insert((a.min(b), a.max(b))) {
            return Err(format_error(
                origin,
                line,
                format!("duplicate edge ({a}, {b})"),
            ));
        }
        edges.push((a, b));
    }
    Ok(SiteGraph::new(n_sites, edges)?)
}

pub fn load_contact_graph(path: &Path) -> Result<SiteGraph> {
    parse_contact_graph(&read_text(path)?, &path.display().to_string())
}

/// Inverse of [`parse_contact_graph`].
pub fn render_contact_graph(graph: &SiteGraph) -> String {
    let mut out = format!("{}\n", graph.n_sites());
    for (a, b) in graph.edges() {
        out.push_str(&format!("{a} {b}\n"));
    }
    out
}

/// A single line of one-letter residue codes; surrounding whitespace is
/// ignored.
pub fn parse_sequence(text: &str, origin: &str) -> Result<AminoSequence> {
    let content = text.trim();
    if content.lines().count() > 1 {
        return Err(format_error(origin, 2, "sequence must be a single line"));
    }
    AminoSequence::new(content).map_err(|e| format_error(origin, 1, e.to_string()))
}

pub fn load_sequence(path: &Path) -> Result<AminoSequence> {
    parse_sequence(&read_text(path)?, &path.display().to_string())
}

/// Site labels as `0`/`1` characters; whitespace and comments are skipped.
pub fn parse_data(text: &str, origin: &str) -> Result<Configuration> {
    let mut states = Vec::new();
    for (line, content) in content_lines(text) {
        for c in content.chars().filter(|c| !c.is_whitespace()) {
            match c {
                '0' => states.push(0),
                '1' => states.push(1),
                other => {
                    return Err(format_error(
                        origin,
                        line,
                        format!("label {other:?} is not 0 or 1"),
                    ))
                }
            }
        }
    }
    if states.is_empty() {
        return Err(format_error(origin, 1, "no site labels"));
    }
    Ok(Configuration::new(states)?)
}

pub fn load_data(path: &Path) -> Result<Configuration> {
    parse_data(&read_text(path)?, &path.display().to_string())
}

/// A model read from a model file.
#[derive(Debug, Clone, PartialEq)]
pub struct NamedModel {
    pub name: String,
    pub spec: ModelSpec,
}

/// Model files are `key = value` lines:
///
/// ```text
/// name = NS
/// statistic = ising      # bernoulli | markov | ising
/// graph = ns.graph       # ising only, relative to the model file
/// prior = 0 4            # uniform prior bounds on θ
/// ```
///
/// `resolve` maps a graph path to a loaded graph.
pub fn parse_model(
    text: &str,
    origin: &str,
    resolve: impl Fn(&str) -> Result<SiteGraph>,
) -> Result<NamedModel> {
    let mut fields: BTreeMap<&str, (usize, &str)> = BTreeMap::new();
    for (line, content) in content_lines(text) {
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| format_error(origin, line, "expected key = value"))?;
        let key = key.trim();
        if !matches!(key, "name" | "statistic" | "graph" | "prior") {
            return Err(format_error(origin, line, format!("unknown key {key:?}")));
        }
        if fields.insert(key, (line, value.trim())).is_some() {
            return Err(format_error(origin, line, format!("{key} given twice")));
        }
    }
    let last_line = text.lines().count().max(1);
    let (stat_line, kind) = *fields
        .get("statistic")
        .ok_or_else(|| format_error(origin, last_line, "missing statistic"))?;
    let (prior_line, prior) = *fields
        .get("prior")
        .ok_or_else(|| format_error(origin, last_line, "missing prior"))?;
    let bounds: Vec<f64> = prior
        .split_whitespace()
        .map(str::parse)
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| format_error(origin, prior_line, "prior must be two numbers"))?;
    let [low, high] = bounds[..] else {
        return Err(format_error(
            origin,
            prior_line,
            "prior must be two numbers",
        ));
    };
    let statistic = match kind {
        "bernoulli" => Statistic::BernoulliCount,
        "markov" => Statistic::MarkovPersistence,
        "ising" => {
            let (_, graph) = *fields
                .get("graph")
                .ok_or_else(|| format_error(origin, stat_line, "ising model needs a graph"))?;
            Statistic::IsingMatch(Arc::new(resolve(graph)?))
        }
        other => {
            return Err(format_error(
                origin,
                stat_line,
                format!("statistic {other:?}: expected bernoulli, markov or ising"),
            ))
        }
    };
    if kind != "ising" {
        if let Some(&(line, _)) = fields.get("graph") {
            return Err(format_error(
                origin,
                line,
                "graph only applies to ising models",
            ));
        }
    }
    let spec = ModelSpec::new(statistic, low, high)
        .map_err(|e| format_error(origin, prior_line, e.to_string()))?;
    let name = fields
        .get("name")
        .map(|&(_, n)| n.to_string())
        .unwrap_or_else(|| kind.to_string());
    Ok(NamedModel { name, spec })
}

pub fn load_model(path: &Path) -> Result<NamedModel> {
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    parse_model(&read_text(path)?, &path.display().to_string(), |graph| {
        load_contact_graph(&base.join(graph))
    })
}

/// A `--graph` argument: `NAME=FILE`, or `FILE` named by its stem.
pub fn parse_graph_arg(arg: &str) -> (String, PathBuf) {
    match arg.split_once('=') {
        Some((name, path)) if !name.is_empty() => (name.to_string(), PathBuf::from(path)),
        _ => {
            let path = PathBuf::from(arg);
            let name = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| arg.to_string());
            (name, path)
        }
    }
}

pub fn load_candidate(name: &str, path: &Path) -> Result<CandidateStructure> {
    Ok(CandidateStructure::new(name, load_contact_graph(path)?))
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn csv_string<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| CliError::Config(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn parse_csv<T: DeserializeOwned>(text: &str) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    Ok(r.deserialize().collect::<std::result::Result<_, _>>()?)
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    write_text(path, &csv_string(rows)?)
}

pub fn read_csv<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    parse_csv(&read_text(path)?)
}

/// Pretty JSON with a trailing newline.
pub fn json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn no_graphs(_: &str) -> Result<SiteGraph> {
        Err(CliError::Config("no graphs here".into()))
    }

    #[test]
    fn graph_files() {
        let g = parse_contact_graph("3\n0 1\n1 2\n", "g").unwrap();
        assert_eq!(g, SiteGraph::path(3));
        let g = parse_contact_graph("# header\n4   # sites\n\n0 3\n2\t1\n", "g").unwrap();
        assert_eq!(g.n_edges(), 2);
        assert_eq!(
            parse_contact_graph(&render_contact_graph(&g), "g").unwrap(),
            g
        );
    }

    fn error_line(text: &str) -> (usize, String) {
        match parse_contact_graph(text, "g").unwrap_err() {
            CliError::Format { line, message, .. } => (line, message),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn graph_errors_carry_lines() {
        let (line, msg) = error_line("2\n0 0\n");
        assert_eq!(line, 2);
        assert!(msg.contains("self-loop"));
        let (line, msg) = error_line("2\n0 1\n0 1\n");
        assert_eq!(line, 3);
        assert!(msg.contains("duplicate"));
        let (line, msg) = error_line("2\n0 1\n1 0\n");
        assert_eq!(line, 3);
        assert!(msg.contains("duplicate"));
        let (line, msg) = error_line("3\n# c\n0 3\n");
        assert_eq!(line, 3);
        assert!(msg.contains("out of range"));
        assert_eq!(error_line("3\n0 1 2\n").0, 2);
        assert_eq!(error_line("x\n").0, 1);
        assert_eq!(error_line("").0, 1);
        assert_eq!(error_line("3\n0 -1\n").0, 2);
    }

    #[test]
    fn sequences() {
        assert_eq!(parse_sequence("KAC\n", "s").unwrap().as_str(), "KAC");
        assert_eq!(parse_sequence("KAC", "s").unwrap().as_str(), "KAC");
        assert!(parse_sequence("", "s").unwrap().is_empty());
        assert!(parse_sequence("KA\nC\n", "s").is_err());
        let err = parse_sequence("KAXC\n", "s").unwrap_err();
        assert!(err.to_string().contains("position 2"), "{err}");
    }

    #[test]
    fn data_files() {
        let x = parse_data("0101 1\n# trailing\n10\n", "d").unwrap();
        assert_eq!(x.states(), &[0, 1, 0, 1, 1, 1, 0]);
        assert!(matches!(
            parse_data("012\n", "d"),
            Err(CliError::Format { line: 1, .. })
        ));
        assert!(parse_data("# nothing\n", "d").is_err());
    }

    #[test]
    fn model_files() {
        let m = parse_model(
            "name = B\nstatistic = bernoulli\nprior = -5 5\n",
            "m",
            no_graphs,
        )
        .unwrap();
        assert_eq!(m.name, "B");
        assert_eq!(m.spec, ModelSpec::toy_bernoulli());
        let m = parse_model(
            "statistic = markov # persistence\nprior = 0 6\n",
            "m",
            no_graphs,
        )
        .unwrap();
        assert_eq!(m.name, "markov");
        assert_eq!(m.spec, ModelSpec::toy_markov());
        let m = parse_model(
            "statistic = ising\ngraph = a.graph\nprior = 0 4\n",
            "m",
            |p| {
                assert_eq!(p, "a.graph");
                Ok(SiteGraph::path(5))
            },
        )
        .unwrap();
        assert_eq!(m.spec.statistic().n_sites(), Some(5));

        for bad in [
            "statistic = potts\nprior = 0 1\n",
            "statistic = bernoulli\n",
            "statistic = bernoulli\nprior = 1\n",
            "statistic = bernoulli\nprior = 2 1\n",
            "statistic = bernoulli\nprior = 0 1\ngraph = g\n",
            "statistic = ising\nprior = 0 1\n",
            "statistic = bernoulli\nstatistic = markov\nprior = 0 1\n",
            "colour = red\n",
        ] {
            assert!(parse_model(bad, "m", no_graphs).is_err(), "{bad:?}");
        }
    }

    #[test]
    fn graph_args() {
        assert_eq!(
            parse_graph_arg("NS=a/b.graph"),
            ("NS".into(), PathBuf::from("a/b.graph"))
        );
        assert_eq!(
            parse_graph_arg("a/st1.graph"),
            ("st1".into(), PathBuf::from("a/st1.graph"))
        );
    }
}
