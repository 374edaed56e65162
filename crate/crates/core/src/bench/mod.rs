//! Instance generators and experiment drivers.

pub mod entropy_search;
pub mod fidelity;
pub mod gp;
pub mod recall;
pub mod runtime;
pub mod synthetic;

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::error::PomError;
use crate::metrics::MetricError;
use crate::types::BeliefError;

pub use entropy_search::{entropy_search_step, run_entropy_search, EsBackend, EsConfig, EsRun, EsStep};
pub use fidelity::{expected_improvement, marginals, run_fidelity_suite, FidelityConfig, Suite, TruthPolicy};
pub use gp::{condition, dropwave, GpModel, Kernel};
pub use recall::{recall_curve_suite, RecallMethod, RecallReport};
pub use runtime::{projected_tsmc_seconds, runtime_sweep, RuntimeConfig};
pub use synthetic::{synthetic_belief, Family};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BenchError {
    #[error("unknown belief family `{0}`")]
    UnknownFamily(String),
    #[error("kernel matrix is not positive definite after jitter")]
    NotPsd,
    #[error("observation index {index} outside a grid of {len} points")]
    OffGrid { index: usize, len: usize },
    #[error("invalid suite configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Estimator(#[from] PomError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Belief(#[from] BeliefError),
}

/// One benchmark observation.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRecord {
    pub estimator: String,
    pub instance_id: u64,
    pub seed: u64,
    pub domain_size: usize,
    pub bo_step: Option<usize>,
    pub tv: Option<f64>,
    pub entropy_est: Option<f64>,
    pub entropy_true: Option<f64>,
    pub wall_time_s: f64,
    pub error: Option<String>,
}

/// Mean and standard error of one column, grouped by estimator and size.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub estimator: String,
    pub domain_size: usize,
    pub count: usize,
    pub tv_mean: Option<f64>,
    pub tv_se: Option<f64>,
    pub wall_time_mean: f64,
    pub wall_time_se: f64,
    pub errors: usize,
}

/// Mean and standard error of the mean; SE is 0 for a single value.
pub fn mean_se(values: &[f64]) -> Option<(f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() == 1 {
        return Some((mean, 0.0));
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Some((mean, (var / n).sqrt()))
}

/// Group records by `(estimator, domain_size)` in first-seen estimator order.
pub fn summarize(records: &[BenchRecord]) -> Vec<SummaryRow> {
    let mut order: Vec<String> = Vec::new();
    let mut groups: BTreeMap<(usize, usize), Vec<&BenchRecord>> = BTreeMap::new();
    for r in records {
        let e = match order.iter().position(|o| *o == r.estimator) {
            Some(i) => i,
            None => {
                order.push(r.estimator.clone());
                order.len() - 1
            }
        };
        groups.entry((e, r.domain_size)).or_default().push(r);
    }
    groups
        .into_iter()
        .map(|((e, size), rows)| {
            let ok: Vec<&&BenchRecord> = rows.iter().filter(|r| r.error.is_none()).collect();
            let tvs: Vec<f64> = ok.iter().filter_map(|r| r.tv).collect();
            let times: Vec<f64> = ok.iter().map(|r| r.wall_time_s).collect();
            let tv = mean_se(&tvs);
            let (wall_time_mean, wall_time_se) = mean_se(&times).unwrap_or((f64::NAN, f64::NAN));
            SummaryRow {
                estimator: order[e].clone(),
                domain_size: size,
                count: rows.len(),
                tv_mean: tv.map(|t| t.0),
                tv_se: tv.map(|t| t.1),
                wall_time_mean,
                wall_time_se,
                errors: rows.len() - ok.len(),
            }
        })
        .collect()
}

/// Least-squares slope of `ln(time)` against `ln(size)` for one estimator.
pub fn loglog_slope(points: &[(usize, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> =
        points.iter().filter(|(_, t)| *t > 0.0).map(|&(n, t)| ((n as f64).ln(), t.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Run `f` and return its result with the elapsed wall time in seconds
/// (never exactly zero).
pub(crate) fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let start = Instant::now();
    let out = f();
    let secs = start.elapsed().max(Duration::from_nanos(1)).as_secs_f64();
    (out, secs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(est: &str, size: usize, tv: f64) -> BenchRecord {
        BenchRecord {
            estimator: est.into(),
            instance_id: 0,
            seed: 0,
            domain_size: size,
            bo_step: None,
            tv: Some(tv),
            entropy_est: None,
            entropy_true: None,
            wall_time_s: 1.0,
            error: None,
        }
    }

    #[test]
    fn summary_groups() {
        let rows = vec![rec("b", 10, 0.1), rec("a", 10, 0.3), rec("b", 10, 0.3), rec("b", 20, 0.5)];
        let s = summarize(&rows);
        assert_eq!(s.len(), 3);
        assert_eq!(s[0].estimator, "b");
        assert_eq!(s[0].count, 2);
        assert!((s[0].tv_mean.unwrap() - 0.2).abs() < 1e-15);
        assert!((s[0].tv_se.unwrap() - 0.1).abs() < 1e-15);
        assert_eq!(s[2].estimator, "a");
    }

    #[test]
    fn slope_of_power_law() {
        let pts: Vec<(usize, f64)> = [10usize, 100, 1000].iter().map(|&n| (n, 3.0 * (n as f64).powf(1.5))).collect();
        assert!((loglog_slope(&pts).unwrap() - 1.5).abs() < 1e-12);
    }
}
