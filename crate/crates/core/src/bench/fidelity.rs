//! Accuracy of estimators against a reference PoM.

use rand::Rng;
use rand_distr::StandardNormal;

use super::gp::{GpModel, Kernel};
use super::synthetic::{synthetic_belief, Family};
use super::{dropwave, timed, BenchError, BenchRecord};
use crate::estimators::{estimate, estimate_independence, estimate_tsmc, tsmc_with_samples, GaussianSampler};
use crate::gauss::{std_normal_cdf, std_normal_pdf};
use crate::metrics::{argmax, shannon_entropy, tv_distance};
use crate::par::Exec;
use crate::rng::SeededRng;
use crate::types::{ConvergenceConfig, FullGaussianBelief, IndependentGaussianBelief, Method, PomEstimate};

/// Smallest marginal standard deviation passed to the independent
/// estimators; GP posteriors can collapse to zero variance at data points.
pub const SIGMA_FLOOR: f64 = 1e-12;

/// Stream index reserved for the reference estimator within a cell.
const TRUTH_STREAM: u64 = 1 << 32;

/// Instance family for a fidelity run.
#[derive(Debug, Clone, PartialEq)]
pub enum Suite {
    /// Independent beliefs of each size.
    Synthetic { family: Family, sizes: Vec<usize> },
    /// Thompson-sampling BO on a sample path of a squared-exponential GP
    /// on `[0, 1]`.
    Gp1d { size: usize, length_scale: f64, noise_std: f64, steps: usize },
    /// Expected-improvement BO on drop-wave over a `k × k` grid of
    /// `[-2.5, 2]²`, Matérn-5/2 model with fixed hyperparameters.
    Dropwave { per_axis: usize, steps: usize, initial: usize, length_scale: f64, amplitude: f64, noise_std: f64 },
}

impl Suite {
    pub fn name(&self) -> &'static str {
        match self {
            Suite::Synthetic { .. } => "synthetic",
            Suite::Gp1d { .. } => "gp1d",
            Suite::Dropwave { .. } => "dropwave",
        }
    }
}

/// How the reference PoM is computed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TruthPolicy {
    /// Trapezoid integration at `ε = max(1/(alpha·|X|), epsilon_floor)`.
    Independence { alpha: f64, epsilon_floor: f64 },
    /// TS-MC on the full covariance at `ε = 1/(alpha·|X|)`, `δ = 0.05`,
    /// with at most `max_samples` draws. When capped, the record's error
    /// column is empty and the achieved ε is smaller than requested.
    Tsmc { alpha: f64, max_samples: u64 },
}

impl TruthPolicy {
    /// Per-arm accuracy actually delivered for `n` arms.
    pub fn effective_epsilon(&self, n: usize) -> f64 {
        match *self {
            TruthPolicy::Independence { alpha, epsilon_floor } => (1.0 / (alpha * n as f64)).max(epsilon_floor),
            TruthPolicy::Tsmc { alpha, max_samples } => {
                let eps = 1.0 / (alpha * n as f64);
                let need = crate::estimators::tsmc_sample_count(eps, 0.05);
                if need <= max_samples as f64 {
                    eps
                } else {
                    ((2.0f64 / 0.05).ln() / (2.0 * max_samples as f64)).sqrt()
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FidelityConfig {
    pub suite: Suite,
    pub methods: Vec<Method>,
    pub seeds: u64,
    /// Estimator accuracy `ε = 1/(alpha·|X|)`.
    pub alpha: f64,
    pub truth: TruthPolicy,
    pub master_seed: u64,
    /// BO steps (number of observations so far) at which PoM is evaluated.
    pub eval_steps: Vec<usize>,
    pub exec: Exec,
}

impl FidelityConfig {
    /// Independent beliefs, `α = 200`, trapezoid reference with a `5e-4` floor.
    pub fn synthetic(family: Family, sizes: Vec<usize>, seeds: u64) -> Self {
        Self {
            suite: Suite::Synthetic { family, sizes },
            methods: vec![Method::Flite, Method::Alite, Method::Fvapor, Method::Est],
            seeds,
            alpha: 200.0,
            truth: TruthPolicy::Independence { alpha: 200.0, epsilon_floor: 5e-4 },
            master_seed: 0,
            eval_steps: Vec::new(),
            exec: Exec::default(),
        }
    }

    /// 300-point GP path, 30 TS steps, `α = 10`, capped TS-MC reference.
    pub fn gp1d(seeds: u64) -> Self {
        Self {
            suite: Suite::Gp1d { size: 300, length_scale: 0.005, noise_std: 0.1, steps: 30 },
            methods: vec![Method::Flite, Method::Alite, Method::Fvapor, Method::Est, Method::Independence],
            seeds,
            alpha: 10.0,
            truth: TruthPolicy::Tsmc { alpha: 10.0, max_samples: 100_000 },
            master_seed: 0,
            eval_steps: vec![10, 20, 30],
            exec: Exec::default(),
        }
    }

    /// 25×25 drop-wave grid, 10 random then 30 EI steps.
    pub fn dropwave(seeds: u64) -> Self {
        Self {
            suite: Suite::Dropwave {
                per_axis: 25,
                steps: 30,
                initial: 10,
                length_scale: 0.3,
                amplitude: 0.3,
                noise_std: 0.1,
            },
            methods: vec![Method::Flite, Method::Alite, Method::Fvapor, Method::Est, Method::Independence],
            seeds,
            alpha: 10.0,
            truth: TruthPolicy::Tsmc { alpha: 10.0, max_samples: 100_000 },
            master_seed: 0,
            eval_steps: vec![20, 30, 40],
            exec: Exec::default(),
        }
    }
}

/// Drop correlations, flooring each standard deviation at [`SIGMA_FLOOR`].
pub fn marginals(belief: &FullGaussianBelief) -> Result<IndependentGaussianBelief, BenchError> {
    let sigma = (0..belief.len()).map(|i| belief.cov()[(i, i)].max(0.0).sqrt().max(SIGMA_FLOOR)).collect();
    Ok(IndependentGaussianBelief::new(belief.mu().to_vec(), sigma)?)
}

/// Run every `(instance, seed, estimator)` cell. Estimator failures are
/// recorded in the row's `error` column.
pub fn run_fidelity_suite(cfg: &FidelityConfig) -> Result<Vec<BenchRecord>, BenchError> {
    if cfg.methods.is_empty() {
        return Err(BenchError::InvalidConfig("no estimators selected".into()));
    }
    let mut out = Vec::new();
    match &cfg.suite {
        Suite::Synthetic { family, sizes } => {
            for &size in sizes {
                for seed in 0..cfg.seeds {
                    let mut rng = SeededRng::derive(cfg.master_seed, size as u64, seed);
                    let belief = synthetic_belief(size, &mut rng, family.name())?;
                    let full = cfg.methods.contains(&Method::Tsmc).then(|| belief.to_full());
                    let cell = Cell { instance_id: size as u64, seed, bo_step: None, rng_seed: rng.seed() };
                    evaluate_cell(cfg, &cell, &belief, full.as_ref(), &mut out);
                }
            }
        }
        Suite::Gp1d { size, length_scale, noise_std, steps } => {
            let model = GpModel::new(
                Kernel::SquaredExponential,
                *length_scale,
                1.0,
                *noise_std,
                GpModel::unit_interval(*size),
            )?;
            for seed in 0..cfg.seeds {
                let mut rng = SeededRng::derive(cfg.master_seed, 0, seed);
                let f_true = model.sample_prior(&mut rng)?;
                let mut obs: Vec<(usize, f64)> = Vec::new();
                for step in 0..=*steps {
                    let post = model.posterior(&obs)?;
                    if cfg.eval_steps.contains(&step) {
                        let belief = marginals(&post)?;
                        let cell = Cell { instance_id: 0, seed, bo_step: Some(step), rng_seed: rng.seed() };
                        evaluate_cell(cfg, &cell, &belief, Some(&post), &mut out);
                    }
                    if step == *steps {
                        break;
                    }
                    let sampler = GaussianSampler::new(post.cov())?;
                    let counts = sampler.argmax_counts(post.mu(), 1, &mut rng, Exec::Sequential, None)?;
                    let x = counts.iter().position(|c| *c > 0).unwrap_or(0);
                    obs.push((x, f_true[x] + noise_std * rng.sample::<f64, _>(StandardNormal)));
                }
            }
        }
        Suite::Dropwave { per_axis, steps, initial, length_scale, amplitude, noise_std } => {
            let grid = GpModel::square(*per_axis, -2.5, 2.0);
            let f_true: Vec<f64> = grid.iter().map(|p| dropwave(p[0], p[1])).collect();
            let base = GpModel::new(Kernel::Matern52, *length_scale, *amplitude, *noise_std, grid)?;
            for seed in 0..cfg.seeds {
                let mut rng = SeededRng::derive(cfg.master_seed, 1, seed);
                let n = base.len();
                let mut obs: Vec<(usize, f64)> = (0..*initial)
                    .map(|_| {
                        let x = rng.random_range(0..n);
                        (x, f_true[x] + noise_std * rng.sample::<f64, _>(StandardNormal))
                    })
                    .collect();
                for step in 0..=*steps {
                    let mean = obs.iter().map(|o| o.1).sum::<f64>() / obs.len().max(1) as f64;
                    let model = base.clone().with_mean(mean);
                    let post = model.posterior(&obs)?;
                    let observed = obs.len();
                    if cfg.eval_steps.contains(&observed) {
                        let belief = marginals(&post)?;
                        let cell = Cell { instance_id: 1, seed, bo_step: Some(observed), rng_seed: rng.seed() };
                        evaluate_cell(cfg, &cell, &belief, Some(&post), &mut out);
                    }
                    if step == *steps {
                        break;
                    }
                    let best = obs.iter().map(|o| o.1).fold(f64::NEG_INFINITY, f64::max);
                    let ei: Vec<f64> =
                        (0..n).map(|i| expected_improvement(post.mu()[i], post.cov()[(i, i)].max(0.0).sqrt(), best)).collect();
                    let x = argmax(&ei);
                    obs.push((x, f_true[x] + noise_std * rng.sample::<f64, _>(StandardNormal)));
                }
            }
        }
    }
    Ok(out)
}

/// `E[max(F - best, 0)]` for `F ~ N(mu, sd²)`.
pub fn expected_improvement(mu: f64, sd: f64, best: f64) -> f64 {
    let d = mu - best;
    if sd <= 0.0 {
        return d.max(0.0);
    }
    let z = d / sd;
    d * std_normal_cdf(z) + sd * std_normal_pdf(z)
}

struct Cell {
    instance_id: u64,
    seed: u64,
    bo_step: Option<usize>,
    rng_seed: u64,
}

fn evaluate_cell(
    cfg: &FidelityConfig,
    cell: &Cell,
    belief: &IndependentGaussianBelief,
    full: Option<&FullGaussianBelief>,
    out: &mut Vec<BenchRecord>,
) {
    let n = belief.len();
    let step_stream = cell.bo_step.unwrap_or(0) as u64;
    let truth = reference(cfg, belief, full, SeededRng::derive(cell.rng_seed, TRUTH_STREAM, step_stream));
    let entropy_true = truth.as_ref().ok().and_then(|t| shannon_entropy(&t.probs).ok());
    let est_cfg = ConvergenceConfig::with_alpha(cfg.alpha).exec(cfg.exec);
    for (k, &method) in cfg.methods.iter().enumerate() {
        let mut rng = SeededRng::derive(cell.rng_seed, k as u64, step_stream);
        let (result, secs) = timed(|| match (method, full) {
            (Method::Tsmc, Some(f)) => estimate_tsmc(f, &est_cfg, &mut rng),
            _ => estimate(method, belief, &est_cfg, Some(&mut rng)),
        });
        let mut rec = BenchRecord {
            estimator: method.tag().to_string(),
            instance_id: cell.instance_id,
            seed: cell.seed,
            domain_size: n,
            bo_step: cell.bo_step,
            tv: None,
            entropy_est: None,
            entropy_true,
            wall_time_s: secs,
            error: None,
        };
        match (&result, &truth) {
            (Ok(est), Ok(t)) => {
                rec.tv = tv_distance(&est.probs, &t.probs).ok();
                rec.entropy_est = shannon_entropy(&est.probs).ok();
            }
            (Ok(est), Err(e)) => {
                rec.entropy_est = shannon_entropy(&est.probs).ok();
                rec.error = Some(format!("reference: {e}"));
            }
            (Err(e), _) => rec.error = Some(format!("{}: {e}", e.kind())),
        }
        out.push(rec);
    }
}

fn reference(
    cfg: &FidelityConfig,
    belief: &IndependentGaussianBelief,
    full: Option<&FullGaussianBelief>,
    mut rng: SeededRng,
) -> Result<PomEstimate, crate::PomError> {
    let n = belief.len();
    match cfg.truth {
        TruthPolicy::Independence { .. } => {
            let eps = cfg.truth.effective_epsilon(n);
            estimate_independence(belief, &ConvergenceConfig::with_epsilon(eps).exec(cfg.exec))
        }
        TruthPolicy::Tsmc { alpha, max_samples } => {
            let need = crate::estimators::tsmc_sample_count(1.0 / (alpha * n as f64), 0.05);
            let samples = need.min(max_samples as f64) as u64;
            match full {
                Some(f) => tsmc_with_samples(f, samples, &mut rng, cfg.exec),
                None => tsmc_with_samples(&belief.to_full(), samples, &mut rng, cfg.exec),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn independence_against_itself() {
        let mut cfg = FidelityConfig::synthetic(Family::Main, vec![50], 2);
        cfg.methods = vec![Method::Independence];
        cfg.truth = TruthPolicy::Independence { alpha: 200.0, epsilon_floor: 0.0 };
        let rows = run_fidelity_suite(&cfg).unwrap();
        assert_eq!(rows.len(), 2);
        for r in rows {
            assert_eq!(r.tv, Some(0.0));
            assert!(r.wall_time_s > 0.0);
        }
    }

    #[test]
    fn rows_are_reproducible() {
        let cfg = FidelityConfig::synthetic(Family::SmallStd, vec![30, 60], 3);
        let a = run_fidelity_suite(&cfg).unwrap();
        let b = run_fidelity_suite(&cfg).unwrap();
        assert_eq!(a.len(), 2 * 3 * 4);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!((x.tv, x.entropy_est, x.entropy_true), (y.tv, y.entropy_est, y.entropy_true));
            assert!(x.tv.unwrap() >= 0.0 && x.tv.unwrap() <= 1.0);
        }
    }

    #[test]
    fn small_gp_suite_runs() {
        let mut cfg = FidelityConfig::gp1d(1);
        cfg.suite = Suite::Gp1d { size: 40, length_scale: 0.05, noise_std: 0.1, steps: 4 };
        cfg.eval_steps = vec![0, 4];
        cfg.truth = TruthPolicy::Tsmc { alpha: 10.0, max_samples: 5000 };
        let rows = run_fidelity_suite(&cfg).unwrap();
        assert_eq!(rows.len(), 2 * cfg.methods.len());
        assert!(rows.iter().all(|r| r.error.is_none() && r.tv.is_some()));
    }

    #[test]
    fn small_dropwave_suite_runs() {
        let mut cfg = FidelityConfig::dropwave(1);
        cfg.suite =
            Suite::Dropwave { per_axis: 8, steps: 3, initial: 4, length_scale: 0.5, amplitude: 0.3, noise_std: 0.1 };
        cfg.eval_steps = vec![7];
        cfg.truth = TruthPolicy::Tsmc { alpha: 10.0, max_samples: 5000 };
        let rows = run_fidelity_suite(&cfg).unwrap();
        assert_eq!(rows.len(), cfg.methods.len());
        assert!(rows.iter().all(|r| r.bo_step == Some(7)));
    }

    #[test]
    fn ei_limits() {
        assert_eq!(expected_improvement(1.0, 0.0, 0.5), 0.5);
        assert_eq!(expected_improvement(0.0, 0.0, 0.5), 0.0);
        assert!((expected_improvement(0.0, 1.0, 0.0) - 1.0 / (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn capped_reference_accuracy() {
        let t = TruthPolicy::Tsmc { alpha: 10.0, max_samples: 1000 };
        let e = t.effective_epsilon(300);
        assert!(e > 1.0 / 3000.0);
        assert!((e - ((40f64).ln() / 2000.0).sqrt()).abs() < 1e-15);
    }
}
