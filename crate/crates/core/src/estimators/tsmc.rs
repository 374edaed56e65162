//! Thompson-sampling Monte Carlo: histogram of argmaxes of correlated
//! Gaussian draws. Unbiased, and the reference for correlated beliefs.

use std::time::{Duration, Instant};

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::PomError;
use crate::par::Exec;
use crate::rng::{BlockStreams, SeededRng};
use crate::types::{ConvergenceConfig, FullGaussianBelief, Method, PomEstimate};

/// Samples per generator block.
const BLOCK: usize = 512;
/// Blocks per deadline check.
const BLOCKS_PER_BATCH: usize = 32;
/// Eigenvalues below `-NEG_TOL·λ_max` reject the covariance.
const NEG_TOL: f64 = 1e-10;

/// `n = ⌈ln(2/δ) / (2ε²)⌉`, the Hoeffding sample count for per-arm
/// accuracy `ε` with probability `1 - δ`.
pub fn tsmc_sample_count(epsilon: f64, delta: f64) -> f64 {
    ((2.0 / delta).ln() / (2.0 * epsilon * epsilon)).ceil()
}

/// Square-root factor `L` with `L Lᵀ = Σ`, built from the eigendecomposition.
/// Columns for zero eigenvalues are dropped, so `L` is `|X| × rank`.
#[derive(Debug, Clone)]
pub struct GaussianSampler {
    factor: DMatrix<f64>,
}

impl GaussianSampler {
    pub fn new(cov: &DMatrix<f64>) -> Result<Self, PomError> {
        let eig = SymmetricEigen::new(cov.clone());
        let lambda_max = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
        let mut keep = Vec::new();
        for (k, &l) in eig.eigenvalues.iter().enumerate() {
            if l < -NEG_TOL * lambda_max || (lambda_max == 0.0 && l < 0.0) {
                return Err(PomError::NotPsd { eigenvalue: l });
            }
            if l > 0.0 {
                keep.push(k);
            }
        }
        let n = cov.nrows();
        let mut factor = DMatrix::zeros(n, keep.len());
        for (c, &k) in keep.iter().enumerate() {
            let scale = eig.eigenvalues[k].sqrt();
            factor.set_column(c, &(eig.eigenvectors.column(k) * scale));
        }
        Ok(Self { factor })
    }

    pub fn rank(&self) -> usize {
        self.factor.ncols()
    }

    /// Argmax counts of `n` draws from `N(mu, Σ)`.
    pub fn argmax_counts(
        &self,
        mu: &[f64],
        n: u64,
        rng: &mut SeededRng,
        exec: Exec,
        deadline: Option<Duration>,
    ) -> Result<Vec<u64>, PomError> {
        let start = Instant::now();
        let streams = rng.block_streams();
        let blocks = n.div_ceil(BLOCK as u64);
        let mut counts = vec![0u64; mu.len()];
        let mut next = 0u64;
        while next < blocks {
            let end = (next + BLOCKS_PER_BATCH as u64).min(blocks);
            let per_block = exec.map((end - next) as usize, |k| {
                let b = next + k as u64;
                let size = (n - b * BLOCK as u64).min(BLOCK as u64) as usize;
                self.block_counts(mu, &streams, b, size)
            });
            for bc in per_block {
                for (c, v) in counts.iter_mut().zip(bc) {
                    *c += v;
                }
            }
            next = end;
            if let Some(limit) = deadline {
                let elapsed = start.elapsed();
                if elapsed > limit && next < blocks {
                    return Err(PomError::Timeout { elapsed });
                }
            }
        }
        Ok(counts)
    }

    fn block_counts(&self, mu: &[f64], streams: &BlockStreams, block: u64, size: usize) -> Vec<u64> {
        let mut r = streams.block(block);
        let rank = self.rank();
        let z = DMatrix::<f64>::from_fn(rank, size, |_, _| r.sample(StandardNormal));
        let draws = &self.factor * z;
        let mut counts = vec![0u64; mu.len()];
        for j in 0..size {
            let col = draws.column(j);
            let mut best = 0;
            let mut best_val = mu[0] + col[0];
            for i in 1..mu.len() {
                let v = mu[i] + col[i];
                if v > best_val {
                    best = i;
                    best_val = v;
                }
            }
            counts[best] += 1;
        }
        counts
    }
}

/// TS-MC estimate with its sampling parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct TsmcOutcome {
    pub estimate: PomEstimate,
    pub samples: u64,
    pub epsilon: f64,
    pub delta: f64,
}

/// Sample count from `(ε, δ)`, then [`tsmc_with_samples`].
pub fn estimate_tsmc(
    belief: &FullGaussianBelief,
    cfg: &ConvergenceConfig,
    rng: &mut SeededRng,
) -> Result<PomEstimate, PomError> {
    Ok(tsmc_detailed(belief, cfg, rng)?.estimate)
}

pub fn tsmc_detailed(
    belief: &FullGaussianBelief,
    cfg: &ConvergenceConfig,
    rng: &mut SeededRng,
) -> Result<TsmcOutcome, PomError> {
    let epsilon = cfg.epsilon(belief.len())?;
    let delta = cfg.delta()?;
    let required = tsmc_sample_count(epsilon, delta);
    if !(required <= cfg.max_samples as f64) {
        return Err(PomError::SampleBudgetOverflow { required, cap: cfg.max_samples });
    }
    let samples = required as u64;
    let mut estimate = tsmc_run(belief, samples, rng, cfg.exec, cfg.deadline)?;
    estimate.max_error_bound = Some(epsilon);
    Ok(TsmcOutcome { estimate, samples, epsilon, delta })
}

/// TS-MC with a fixed number of draws.
pub fn tsmc_with_samples(
    belief: &FullGaussianBelief,
    samples: u64,
    rng: &mut SeededRng,
    exec: Exec,
) -> Result<PomEstimate, PomError> {
    tsmc_run(belief, samples, rng, exec, None)
}

fn tsmc_run(
    belief: &FullGaussianBelief,
    samples: u64,
    rng: &mut SeededRng,
    exec: Exec,
    deadline: Option<Duration>,
) -> Result<PomEstimate, PomError> {
    let sampler = GaussianSampler::new(belief.cov())?;
    let counts = sampler.argmax_counts(belief.mu(), samples.max(1), rng, exec, deadline)?;
    Ok(histogram_estimate(&counts))
}

pub(crate) fn histogram_estimate(counts: &[u64]) -> PomEstimate {
    let total: u64 = counts.iter().sum();
    let probs = counts.iter().map(|&c| c as f64 / total as f64).collect();
    PomEstimate {
        probs,
        method: Method::Tsmc,
        threshold: None,
        iterations: total as usize,
        max_error_bound: None,
        raw: None,
    }
}
