use std::fs;
use std::io::{self, Read};

use cim_core::graphs::parse_graph6_lines;
use cim_core::harness::graph_instance_key;
use cim_core::model::{maxcut_to_ising, Graph, IsingProblem};

use crate::CliError;

/// A problem read from a file or stdin.
pub enum Instance {
    Graph(Graph),
    Ising(IsingProblem),
}

impl Instance {
    pub fn problem(&self) -> IsingProblem {
        match self {
            Instance::Graph(g) => maxcut_to_ising(g),
            Instance::Ising(p) => p.clone(),
        }
    }

    /// Seed stream key of the instance.
    pub fn key(&self) -> Result<Vec<u8>, CliError> {
        match self {
            Instance::Graph(g) => Ok(graph_instance_key(g)?),
            Instance::Ising(p) => {
                let json = serde_json::to_string(p).map_err(|e| CliError::Input(e.to_string()))?;
                Ok(json.into_bytes())
            }
        }
    }

    /// `χ` from the `--xi` / `--chi` flags. On graphs `xi` is the edge coupling
    /// `ξ = −χ J = χ w`; on Ising input it is the scale `χ` itself.
    pub fn resolve_chi(&self, xi: Option<f64>, chi: Option<f64>) -> Result<f64, CliError> {
        match (xi, chi) {
            (Some(_), Some(_)) => Err(CliError::Usage("--xi and --chi are mutually exclusive".into())),
            (None, Some(c)) => Ok(c),
            (Some(x), None) => Ok(match self {
                Instance::Graph(_) => -x,
                Instance::Ising(_) => x,
            }),
            (None, None) => Ok(match self {
                Instance::Graph(_) => -crate::DEFAULT_XI,
                Instance::Ising(_) => cim_core::harness::DEFAULT_CHI,
            }),
        }
    }
}

pub fn read_source(path: &str) -> Result<String, CliError> {
    if path == "-" {
        let mut s = String::new();
        io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| CliError::Input(format!("stdin: {e}")))?;
        Ok(s)
    } else {
        fs::read_to_string(path).map_err(|e| CliError::Input(format!("{path}: {e}")))
    }
}

/// Every instance in `text`: graph6 lines, a JSON graph `{"n", "edges"}`, a JSON
/// Ising problem `{"n", "couplings"}`, or a JSON array of either.
pub fn parse_instances(text: &str) -> Result<Vec<Instance>, CliError> {
    let trimmed = text.trim_start();
    if !(trimmed.starts_with('{') || trimmed.starts_with('[')) {
        let graphs = parse_graph6_lines(text)?;
        if graphs.is_empty() {
            return Err(CliError::Input("no graphs in input".into()));
        }
        return Ok(graphs.into_iter().map(Instance::Graph).collect());
    }
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| CliError::Input(e.to_string()))?;
    let items = match value {
        serde_json::Value::Array(v) => v,
        v => vec![v],
    };
    if items.is_empty() {
        return Err(CliError::Input("no instances in input".into()));
    }
    items.into_iter().map(parse_json_instance).collect()
}

fn parse_json_instance(v: serde_json::Value) -> Result<Instance, CliError> {
    let bad = |e: serde_json::Error| CliError::Input(e.to_string());
    if v.get("edges").is_some() {
        Ok(Instance::Graph(serde_json::from_value(v).map_err(bad)?))
    } else if v.get("couplings").is_some() {
        Ok(Instance::Ising(serde_json::from_value(v).map_err(bad)?))
    } else {
        Err(CliError::Input("JSON instance needs \"edges\" or \"couplings\"".into()))
    }
}

pub fn read_single(path: &str) -> Result<Instance, CliError> {
    let mut all = parse_instances(&read_source(path)?)?;
    if all.len() != 1 {
        return Err(CliError::Input(format!("expected one instance, found {}", all.len())));
    }
    Ok(all.remove(0))
}

pub fn read_graphs(path: &str) -> Result<Vec<Graph>, CliError> {
    parse_instances(&read_source(path)?)?
        .into_iter()
        .map(|i| match i {
            Instance::Graph(g) => Ok(g),
            Instance::Ising(_) => Err(CliError::Input("benchmark corpora must be graphs".into())),
        })
        .collect()
}
