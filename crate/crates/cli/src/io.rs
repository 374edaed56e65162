//! Belief and result documents, CSV tables.

use std::fs;
use std::path::Path;

use pom_lite::bench::BenchRecord;
use pom_lite::{FullGaussianBelief, IndependentGaussianBelief};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

/// `{"mu", "sigma"}` or `{"mu", "cov"}`, optionally with `"labels"`.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BeliefFile {
    mu: Vec<f64>,
    sigma: Option<Vec<f64>>,
    cov: Option<Vec<Vec<f64>>>,
    labels: Option<Vec<String>>,
}

pub enum Belief {
    Independent(IndependentGaussianBelief),
    Full(FullGaussianBelief),
}

pub struct LoadedBelief {
    pub belief: Belief,
    pub labels: Vec<String>,
}

impl LoadedBelief {
    pub fn len(&self) -> usize {
        self.labels.len()
    }
}

pub fn read_belief(path: &Path) -> Result<LoadedBelief, CliError> {
    let bad = |reason: String| CliError::Input { path: path.to_path_buf(), reason };
    let text = fs::read_to_string(path).map_err(|e| bad(e.to_string()))?;
    let file: BeliefFile = serde_json::from_str(&text).map_err(|e| bad(e.to_string()))?;
    let n = file.mu.len();
    let belief = match (file.sigma, file.cov) {
        (Some(sigma), None) => Belief::Independent(
            IndependentGaussianBelief::new(file.mu, sigma).map_err(|e| bad(e.to_string()))?,
        ),
        (None, Some(rows)) => {
            Belief::Full(FullGaussianBelief::from_rows(file.mu, &rows).map_err(|e| bad(e.to_string()))?)
        }
        (None, None) => return Err(bad("needs either `sigma` or `cov`".into())),
        (Some(_), Some(_)) => return Err(bad("give `sigma` or `cov`, not both".into())),
    };
    let labels = match file.labels {
        Some(l) if l.len() == n => l,
        Some(l) => return Err(bad(format!("{} labels for {n} arms", l.len()))),
        None => (0..n).map(|i| format!("x{i}")).collect(),
    };
    Ok(LoadedBelief { belief, labels })
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct ResultFile {
    pub schema_version: u32,
    pub method: String,
    pub epsilon: f64,
    pub probs: Vec<f64>,
    pub labels: Vec<String>,
    pub threshold: Option<f64>,
    pub iterations: usize,
    pub max_error_bound: Option<f64>,
    pub entropy: f64,
    pub wall_time_s: f64,
    pub seed: Option<u64>,
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::output(path, e))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::output(path, e))
}

fn cell<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub const RECORD_HEADER: [&str; 10] = [
    "estimator",
    "instance_id",
    "seed",
    "domain_size",
    "bo_step",
    "tv",
    "entropy_est",
    "entropy_true",
    "wall_time_s",
    "error",
];

/// Write rows of string cells under `header`.
pub fn write_table(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .map_err(|e| CliError::output(path, e))?;
    w.write_record(header).map_err(|e| CliError::output(path, e))?;
    for r in rows {
        w.write_record(r).map_err(|e| CliError::output(path, e))?;
    }
    w.flush().map_err(|e| CliError::output(path, e))
}

pub fn record_row(r: &BenchRecord) -> Vec<String> {
    vec![
        r.estimator.clone(),
        r.instance_id.to_string(),
        r.seed.to_string(),
        r.domain_size.to_string(),
        cell(r.bo_step),
        cell(r.tv),
        cell(r.entropy_est),
        cell(r.entropy_true),
        r.wall_time_s.to_string(),
        r.error.clone().unwrap_or_default(),
    ]
}

pub fn opt(v: Option<f64>) -> String {
    cell(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn load(body: &str) -> Result<LoadedBelief, CliError> {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("b.json");
        fs::write(&path, body).unwrap();
        read_belief(&path)
    }

    #[test]
    fn default_labels_and_kinds() {
        let b = load(r#"{"mu": [0, 1, 2], "sigma": [1, 1, 1]}"#).unwrap();
        assert_eq!(b.labels, ["x0", "x1", "x2"]);
        assert!(matches!(b.belief, Belief::Independent(_)));
        let b = load(r#"{"mu": [0, 1], "cov": [[1, 0.5], [0.5, 1]]}"#).unwrap();
        assert!(matches!(b.belief, Belief::Full(_)));
    }

    #[test]
    fn rejects_malformed_files() {
        for body in [
            r#"{"mu": [0, 1]}"#,
            r#"{"mu": [0, 1], "sigma": [1, 1], "cov": [[1, 0], [0, 1]]}"#,
            r#"{"mu": [0, 1], "sigma": [1, 1], "labels": ["a"]}"#,
            r#"{"mu": [0, 1], "sigma": [1, 1], "extra": 1}"#,
            r#"{"mu": [0, 1], "sigma": [1]}"#,
            "not json",
        ] {
            assert!(matches!(load(body), Err(CliError::Input { .. })), "{body}");
        }
    }
}
