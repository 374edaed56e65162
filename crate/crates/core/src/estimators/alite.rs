//! A-LITE: nested quartile matching with interval propagation.
//!
//! Stage one brackets the quartiles of `g(f) = Π_z Φ((f-μ_z)/σ_z)` and
//! turns them into bounds on a matched Gaussian `Φ((f-m)/s)`. Stage two
//! brackets, per arm, the quartiles of `Φ((f-m̃)/s̃_x) / Φ((f-μ_x)/σ_x)`.
//! Both brackets are refined with `d` bisection steps, and `d` doubles
//! until the implied probability bounds are within `ε` of each other.

use std::f64::consts::SQRT_2;

use crate::error::PomError;
use crate::gauss::{quantile, std_normal_cdf, std_normal_log_cdf};
use crate::par::Exec;
use crate::types::{ConvergenceConfig, IndependentGaussianBelief, Method, PomEstimate};

/// Largest bisection depth tried before giving up.
pub const MAX_DEPTH: usize = 1 << 20;

/// Brackets on the first and third quartile and the Gaussian moments they imply.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuartileInterval {
    pub q1_low: f64,
    pub q1_up: f64,
    pub q3_low: f64,
    pub q3_up: f64,
}

impl QuartileInterval {
    pub fn m_up(&self) -> f64 {
        (self.q3_up + self.q1_up) / 2.0
    }

    pub fn m_low(&self) -> f64 {
        (self.q3_low + self.q1_low) / 2.0
    }

    pub fn s_up(&self) -> f64 {
        (self.q3_up - self.q1_low) / (2.0 * quantile(0.75))
    }

    pub fn s_low(&self) -> f64 {
        (self.q3_low - self.q1_up) / (2.0 * quantile(0.75))
    }
}

/// A-LITE estimate with its per-arm probability bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct AliteOutcome {
    pub estimate: PomEstimate,
    pub p_low: Vec<f64>,
    pub p_up: Vec<f64>,
    /// Final bisection depth.
    pub depth: usize,
    /// Passes abandoned because a spread bound was negative or a window
    /// was unbounded.
    pub restarts: usize,
    /// Stage-two windows whose ends did not bracket the target level.
    pub bracket_violations: usize,
}

impl AliteOutcome {
    pub fn max_gap(&self) -> f64 {
        self.p_up.iter().zip(&self.p_low).map(|(u, l)| u - l).fold(0.0, f64::max)
    }
}

pub fn estimate_alite(belief: &IndependentGaussianBelief, cfg: &ConvergenceConfig) -> Result<PomEstimate, PomError> {
    Ok(alite_detailed(belief, cfg)?.estimate)
}

/// Search window for the `b`-quantile of `g`:
/// `[μ_min + σ_min Φ⁻¹(b^{1/N}), μ_max + σ_max Φ⁻¹(b^{1/N})]`.
pub fn stage_one_window(belief: &IndependentGaussianBelief, b: f64) -> (f64, f64) {
    let z = quantile(b.powf(1.0 / belief.len() as f64));
    (belief.mu_min() + belief.sigma_min() * z, belief.mu_max() + belief.sigma_max() * z)
}

/// `d` bisection steps on `ln g` against both quartile levels.
pub fn stage_one(belief: &IndependentGaussianBelief, depth: usize, exec: Exec) -> QuartileInterval {
    let (mu, sigma) = (belief.mu(), belief.sigma());
    let n = belief.len();
    let (mut q1_low, mut q1_up) = stage_one_window(belief, 0.25);
    let (mut q3_low, mut q3_up) = stage_one_window(belief, 0.75);
    let log_g = |f: f64| exec.sum(n, |z| std_normal_log_cdf((f - mu[z]) / sigma[z]));
    let (ln_q1, ln_q3) = (0.25f64.ln(), 0.75f64.ln());
    for _ in 0..depth {
        let q1 = (q1_up + q1_low) / 2.0;
        let q3 = (q3_up + q3_low) / 2.0;
        if log_g(q1) > ln_q1 {
            q1_up = q1;
        } else {
            q1_low = q1;
        }
        if log_g(q3) > ln_q3 {
            q3_up = q3;
        } else {
            q3_low = q3;
        }
    }
    QuartileInterval { q1_low, q1_up, q3_low, q3_up }
}

struct ArmSearch {
    interval: QuartileInterval,
    violations: usize,
}

/// Stage-two bracket for one arm, or `None` when the window is unbounded.
fn stage_two_arm(mu: f64, sigma: f64, stage: &QuartileInterval, mu_max: f64, depth: usize) -> Option<ArmSearch> {
    let m_up = stage.m_up().max(mu_max);
    let m_low = stage.m_low().max(mu_max);
    let s_up = stage.s_up().min(sigma);
    let s_low = stage.s_low().min(sigma);

    // lower window end of the quantile search, infinite branches included
    let lower_end = |b: f64| {
        let l = (2.0 / b).ln();
        let by_mean = (m_low + mu) / 2.0 - sigma * sigma * l / (m_low - mu);
        let ratio = s_up / sigma;
        let by_spread = m_low - (2.0 * l / (1.0 - ratio * ratio)).sqrt() * s_up;
        (mu - SQRT_2 * sigma).min(by_mean.max(by_spread))
    };
    let mut q1_low = lower_end(0.25);
    let mut q1_up = m_up + quantile(0.25) * s_low;
    let mut q3_low = lower_end(0.75);
    let mut q3_up = m_up + quantile(0.75) * s_up;
    if !(q1_low.is_finite() && q3_low.is_finite() && q1_up.is_finite() && q3_up.is_finite()) {
        return None;
    }

    // ln of the largest and smallest ratio over the spread interval
    let log_ratio = |q: f64| {
        let den = std_normal_log_cdf((q - mu) / sigma);
        let a = q - m_low;
        let up = std_normal_log_cdf(a / if a >= 0.0 { s_low } else { s_up }) - den;
        let c = q - m_up;
        let low = std_normal_log_cdf(c / if c >= 0.0 { s_up } else { s_low }) - den;
        (low, up)
    };
    let (ln_q1, ln_q3) = (0.25f64.ln(), 0.75f64.ln());

    let mut violations = 0;
    for (lo, hi, level) in [(q1_low, q1_up, ln_q1), (q3_low, q3_up, ln_q3)] {
        if log_ratio(lo).1 > level || log_ratio(hi).0 < level {
            violations += 1;
        }
    }

    let step = |low: &mut f64, up: &mut f64, level: f64| {
        let q = (*up + *low) / 2.0;
        let (g_low, g_up) = log_ratio(q);
        if g_low >= level {
            *up = q;
        } else if g_up <= level {
            *low = q;
        }
    };
    for _ in 0..depth {
        step(&mut q1_low, &mut q1_up, ln_q1);
        step(&mut q3_low, &mut q3_up, ln_q3);
    }
    Some(ArmSearch { interval: QuartileInterval { q1_low, q1_up, q3_low, q3_up }, violations })
}

/// `Φ((μ - m)/√(σ² + s²))` at the extreme `s ∈ {s_low, s_up}`.
fn pred(mu: f64, sigma: f64, m: f64, s_low: f64, s_up: f64, largest: bool) -> f64 {
    let a = (mu - m) / (sigma * sigma + s_low * s_low).sqrt();
    let b = (mu - m) / (sigma * sigma + s_up * s_up).sqrt();
    std_normal_cdf(if largest { a.max(b) } else { a.min(b) })
}

pub fn alite_detailed(belief: &IndependentGaussianBelief, cfg: &ConvergenceConfig) -> Result<AliteOutcome, PomError> {
    let n = belief.len();
    let eps = cfg.epsilon(n)?;
    let exec = cfg.exec;
    let (mu, sigma) = (belief.mu(), belief.sigma());

    let mut depth = 1;
    let mut restarts = 0;
    loop {
        depth *= 2;
        if depth > MAX_DEPTH {
            return Err(PomError::MaxIterationsExceeded { method: Method::Alite, iterations: depth / 2 });
        }
        let stage = stage_one(belief, depth, exec);
        if stage.s_low() <= 0.0 {
            restarts += 1;
            continue;
        }
        let arms = exec.map(n, |x| stage_two_arm(mu[x], sigma[x], &stage, belief.mu_max(), depth));
        let Some(arms) = arms.into_iter().collect::<Option<Vec<_>>>() else {
            restarts += 1;
            continue;
        };
        if arms.iter().any(|a| a.interval.s_low() < 0.0) {
            restarts += 1;
            continue;
        }

        let (m_up, m_low, s_up, s_low) = (stage.m_up(), stage.m_low(), stage.s_up(), stage.s_low());
        let bounds = exec.map(n, |x| {
            let a = &arms[x].interval;
            let i_up = pred(mu[x], sigma[x], m_low, s_low, s_up, true);
            let i_low = pred(mu[x], sigma[x], m_up, s_low, s_up, false);
            let ii_up = pred(mu[x], sigma[x], a.m_low(), a.s_low(), a.s_up(), true);
            let ii_low = pred(mu[x], sigma[x], a.m_up(), a.s_low(), a.s_up(), false);
            (i_low.max(ii_low), i_up.max(ii_up))
        });
        let max_error = bounds.iter().map(|(lo, up)| up - lo).fold(f64::NEG_INFINITY, f64::max);
        if max_error < eps {
            let (p_low, p_up): (Vec<f64>, Vec<f64>) = bounds.into_iter().unzip();
            let mid = p_low.iter().zip(&p_up).map(|(l, u)| (u + l) / 2.0).collect();
            let mut estimate = PomEstimate::normalized(Method::Alite, mid);
            estimate.iterations = depth;
            estimate.max_error_bound = Some(max_error);
            estimate.threshold = Some((m_up + m_low) / 2.0);
            let bracket_violations = arms.iter().map(|a| a.violations).sum();
            return Ok(AliteOutcome { estimate, p_low, p_up, depth, restarts, bracket_violations });
        }
    }
}
