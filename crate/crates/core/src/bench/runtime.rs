//! Wall-clock scaling of the estimators with the domain size.

use std::time::Duration;

use super::synthetic::{synthetic_belief, Family};
use super::{timed, BenchError, BenchRecord};
use crate::estimators::{estimate, tsmc_sample_count};
use crate::metrics::shannon_entropy;
use crate::par::Exec;
use crate::rng::SeededRng;
use crate::types::{ConvergenceConfig, Method};

/// Floating-point throughput assumed when projecting TS-MC cost. Chosen
/// optimistically so that only hopeless runs are skipped.
const PROJECTION_FLOPS: f64 = 1e10;

#[derive(Debug, Clone, PartialEq)]
pub struct RuntimeConfig {
    /// Domain sizes, ascending.
    pub sizes: Vec<usize>,
    pub methods: Vec<Method>,
    pub alpha: f64,
    pub seeds: u64,
    pub family: Family,
    pub master_seed: u64,
    /// Per-call budget; a method that exceeds it is not run at larger sizes.
    pub budget: Duration,
    pub exec: Exec,
}

impl RuntimeConfig {
    pub fn new(sizes: Vec<usize>, alpha: f64, seeds: u64) -> Self {
        Self {
            sizes,
            methods: vec![Method::Flite, Method::Fvapor, Method::Alite, Method::Tsmc],
            alpha,
            seeds,
            family: Family::Main,
            master_seed: 0,
            budget: Duration::from_secs(60),
            exec: Exec::default(),
        }
    }
}

/// Seconds TS-MC would need for `n` arms at `ε = 1/(alpha·n)`: an
/// eigendecomposition plus one dense matrix-vector product per draw.
pub fn projected_tsmc_seconds(n: usize, alpha: f64, delta: f64) -> f64 {
    let n = n as f64;
    let samples = tsmc_sample_count(1.0 / (alpha * n), delta);
    (10.0 * n * n * n + 2.0 * samples * n * n) / PROJECTION_FLOPS
}

/// Time every method on synthetic beliefs. The `tv` column is empty: no
/// reference is affordable at the largest sizes. Rows whose call exceeded
/// the budget, or was projected to, carry a `timeout` error.
pub fn runtime_sweep(cfg: &RuntimeConfig) -> Result<Vec<BenchRecord>, BenchError> {
    if cfg.sizes.windows(2).any(|w| w[1] < w[0]) {
        return Err(BenchError::InvalidConfig("sizes must be ascending".into()));
    }
    let est_cfg = ConvergenceConfig::with_alpha(cfg.alpha).exec(cfg.exec).deadline(Some(cfg.budget));
    let budget = cfg.budget.as_secs_f64();
    let mut timed_out = vec![false; cfg.methods.len()];
    let mut out = Vec::new();
    for &size in &cfg.sizes {
        for seed in 0..cfg.seeds {
            let mut rng = SeededRng::derive(cfg.master_seed, size as u64, seed);
            let belief = synthetic_belief(size, &mut rng, cfg.family.name())?;
            for (k, &method) in cfg.methods.iter().enumerate() {
                let mut rec = BenchRecord {
                    estimator: method.tag().to_string(),
                    instance_id: size as u64,
                    seed,
                    domain_size: size,
                    bo_step: None,
                    tv: None,
                    entropy_est: None,
                    entropy_true: None,
                    wall_time_s: f64::NAN,
                    error: None,
                };
                if timed_out[k] {
                    rec.error = Some("timeout (budget exceeded at a smaller size)".into());
                    out.push(rec);
                    continue;
                }
                if method == Method::Tsmc {
                    let projected = projected_tsmc_seconds(size, cfg.alpha, est_cfg.mc_delta);
                    if projected > budget {
                        rec.wall_time_s = projected;
                        rec.error = Some(format!("timeout (projected {projected:.3e} s)"));
                        timed_out[k] = true;
                        out.push(rec);
                        continue;
                    }
                }
                let mut call_rng = SeededRng::derive(rng.seed(), k as u64, 0);
                let (result, secs) = timed(|| estimate(method, &belief, &est_cfg, Some(&mut call_rng)));
                rec.wall_time_s = secs;
                match result {
                    Ok(est) => rec.entropy_est = shannon_entropy(&est.probs).ok(),
                    Err(e) => rec.error = Some(format!("{}: {e}", e.kind())),
                }
                if secs > budget {
                    rec.error.get_or_insert_with(|| "timeout".into());
                    timed_out[k] = true;
                }
                out.push(rec);
            }
        }
    }
    Ok(out)
}
