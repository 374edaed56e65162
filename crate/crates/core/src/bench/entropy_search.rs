//! Entropy Search with a pluggable PoM backend.

use std::fmt;

use rand::Rng;
use rand_distr::StandardNormal;

use super::fidelity::SIGMA_FLOOR;
use super::gp::{condition, GpModel, Kernel};
use super::BenchError;
use crate::estimators::{estimate_flite, GaussianSampler};
use crate::metrics::shannon_entropy;
use crate::par::Exec;
use crate::rng::SeededRng;
use crate::types::{ConvergenceConfig, IndependentGaussianBelief};

/// PoM estimator used inside the acquisition function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EsBackend {
    /// F-LITE on the posterior marginals at `ε = 1/(alpha·|X|)`.
    Flite { alpha: f64 },
    /// TS-MC with a fixed number of draws from the full posterior.
    Tsmc { samples: u64 },
}

impl fmt::Display for EsBackend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EsBackend::Flite { .. } => f.write_str("flite"),
            EsBackend::Tsmc { samples } => write!(f, "tsmc{samples}"),
        }
    }
}

/// Outcome of one acquisition.
#[derive(Debug, Clone, PartialEq)]
pub struct EsStep {
    pub query: usize,
    /// Backend entropy of the current posterior.
    pub current_entropy: f64,
    /// Mean fantasy entropy after querying each candidate.
    pub expected_entropy: Vec<f64>,
}

/// Pick the candidate minimizing the expected PoM entropy after one noisy
/// observation. Fantasy `j` uses the same standard normal draw for every
/// candidate; ties go to the lowest index.
pub fn entropy_search_step(
    model: &GpModel,
    data: &[(usize, f64)],
    backend: EsBackend,
    n_fantasy: usize,
    rng: &mut SeededRng,
) -> Result<EsStep, BenchError> {
    if n_fantasy == 0 {
        return Err(BenchError::InvalidConfig("n_fantasy must be at least 1".into()));
    }
    let post = model.posterior(data)?;
    let (mu, cov) = (post.mu(), post.cov());
    let n = mu.len();
    let noise_var = model.noise_std * model.noise_std;
    let xi: Vec<f64> = (0..n_fantasy).map(|_| rng.sample(StandardNormal)).collect();
    let current_entropy = backend_entropy(backend, mu, cov, rng)?;

    let mut expected = Vec::with_capacity(n);
    for x in 0..n {
        let s = cov[(x, x)] + noise_var;
        let mut total = 0.0;
        match backend {
            EsBackend::Flite { alpha } => {
                // only the marginals of the conditioned posterior are needed
                let sigma: Vec<f64> = (0..n)
                    .map(|z| (cov[(z, z)] - cov[(z, x)] * cov[(z, x)] / s).max(0.0).sqrt().max(SIGMA_FLOOR))
                    .collect();
                for &e in &xi {
                    let shift = e / s.sqrt();
                    let m: Vec<f64> = (0..n).map(|z| mu[z] + cov[(z, x)] * shift).collect();
                    total += flite_entropy(m, sigma.clone(), alpha)?;
                }
            }
            EsBackend::Tsmc { samples } => {
                // the conditioned covariance does not depend on the fantasy value
                let (_, cov_x) = condition(mu, cov, x, mu[x], noise_var);
                let sampler = GaussianSampler::new(&cov_x)?;
                for &e in &xi {
                    let shift = e / s.sqrt();
                    let m: Vec<f64> = (0..n).map(|z| mu[z] + cov[(z, x)] * shift).collect();
                    let counts = sampler.argmax_counts(&m, samples, rng, Exec::Sequential, None)?;
                    total += histogram_entropy(&counts);
                }
            }
        }
        expected.push(total / n_fantasy as f64);
    }
    let mut query = 0;
    for (i, v) in expected.iter().enumerate() {
        if *v < expected[query] {
            query = i;
        }
    }
    Ok(EsStep { query, current_entropy, expected_entropy: expected })
}

fn flite_entropy(mu: Vec<f64>, sigma: Vec<f64>, alpha: f64) -> Result<f64, BenchError> {
    let belief = IndependentGaussianBelief::new(mu, sigma)?;
    let cfg = ConvergenceConfig::with_alpha(alpha).exec(Exec::Sequential);
    let est = estimate_flite(&belief, &cfg)?;
    Ok(shannon_entropy(&est.probs)?)
}

fn histogram_entropy(counts: &[u64]) -> f64 {
    let total = counts.iter().sum::<u64>() as f64;
    counts.iter().filter(|c| **c > 0).map(|&c| {
        let p = c as f64 / total;
        -p * p.ln()
    }).sum()
}

fn backend_entropy(
    backend: EsBackend,
    mu: &[f64],
    cov: &nalgebra::DMatrix<f64>,
    rng: &mut SeededRng,
) -> Result<f64, BenchError> {
    match backend {
        EsBackend::Flite { alpha } => {
            let sigma = (0..mu.len()).map(|z| cov[(z, z)].max(0.0).sqrt().max(SIGMA_FLOOR)).collect();
            flite_entropy(mu.to_vec(), sigma, alpha)
        }
        EsBackend::Tsmc { samples } => {
            let counts = GaussianSampler::new(cov)?.argmax_counts(mu, samples, rng, Exec::Sequential, None)?;
            Ok(histogram_entropy(&counts))
        }
    }
}

/// Entropy Search on a sample path of a squared-exponential GP on `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct EsConfig {
    pub size: usize,
    pub steps: usize,
    pub n_fantasy: usize,
    pub length_scale: f64,
    pub amplitude: f64,
    pub noise_std: f64,
    /// Draws used to score the final posterior, shared by all backends.
    pub reference_samples: u64,
    pub master_seed: u64,
}

impl Default for EsConfig {
    fn default() -> Self {
        Self {
            size: 100,
            steps: 15,
            n_fantasy: 5,
            length_scale: 0.02,
            amplitude: 1.0,
            noise_std: 0.2,
            reference_samples: 100_000,
            master_seed: 0,
        }
    }
}

/// One Entropy Search trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct EsRun {
    pub backend: EsBackend,
    pub seed: u64,
    pub queries: Vec<usize>,
    /// TS-MC entropy of the final full posterior with `reference_samples` draws.
    pub final_entropy: f64,
    /// Seconds spent in [`entropy_search_step`].
    pub acquisition_time_s: f64,
}

/// Run `steps` acquisitions. The objective and the observation noise depend
/// only on `(master_seed, seed)`, so backends see the same problem.
pub fn run_entropy_search(cfg: &EsConfig, backend: EsBackend, seed: u64) -> Result<EsRun, BenchError> {
    let model = GpModel::new(
        Kernel::SquaredExponential,
        cfg.length_scale,
        cfg.amplitude,
        cfg.noise_std,
        GpModel::unit_interval(cfg.size),
    )?;
    let f_true = model.sample_prior(&mut SeededRng::derive(cfg.master_seed, 0, seed))?;
    let mut noise = SeededRng::derive(cfg.master_seed, 1, seed);
    let mut fantasies = SeededRng::derive(cfg.master_seed, 2, seed);
    let mut data = Vec::with_capacity(cfg.steps);
    let mut queries = Vec::with_capacity(cfg.steps);
    let mut acquisition_time_s = 0.0;
    for _ in 0..cfg.steps {
        let (step, secs) = super::timed(|| entropy_search_step(&model, &data, backend, cfg.n_fantasy, &mut fantasies));
        acquisition_time_s += secs;
        let x = step?.query;
        queries.push(x);
        data.push((x, f_true[x] + cfg.noise_std * noise.sample::<f64, _>(StandardNormal)));
    }
    let post = model.posterior(&data)?;
    let mut scoring = SeededRng::derive(cfg.master_seed, 3, seed);
    let counts = GaussianSampler::new(post.cov())?.argmax_counts(
        post.mu(),
        cfg.reference_samples,
        &mut scoring,
        Exec::default(),
        None,
    )?;
    Ok(EsRun { backend, seed, queries, final_entropy: histogram_entropy(&counts), acquisition_time_s })
}
