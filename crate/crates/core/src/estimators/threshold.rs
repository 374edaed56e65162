//! Shared-threshold estimators: F-LITE and F-VAPOR, plus F-LITE gradients.
//!
//! Both estimators predict `q_x = S((μ_x - κ)/σ_x)` for an increasing
//! sigmoid `S` and bisect the single threshold `κ` until the predictions
//! sum to one.

use nalgebra::DMatrix;

use crate::error::PomError;
use crate::gauss::{quantile, std_normal_cdf, std_normal_pdf};
use crate::par::Exec;
use crate::types::{ConvergenceConfig, IndependentGaussianBelief, Method, PomEstimate};

/// Increasing map from standardized margin to probability.
pub(crate) trait Sigmoid: Sync {
    const METHOD: Method;
    fn eval(c: f64) -> f64;
    /// Inverse on `(0, S(∞))`.
    fn inverse(r: f64) -> f64;
}

pub(crate) struct NormalCdf;

impl Sigmoid for NormalCdf {
    const METHOD: Method = Method::Flite;

    #[inline]
    fn eval(c: f64) -> f64 {
        std_normal_cdf(c)
    }

    fn inverse(r: f64) -> f64 {
        quantile(r)
    }
}

pub(crate) struct Vapor;

impl Sigmoid for Vapor {
    const METHOD: Method = Method::Fvapor;

    #[inline]
    fn eval(c: f64) -> f64 {
        vapor_sigmoid(c)
    }

    fn inverse(r: f64) -> f64 {
        vapor_sigmoid_inverse(r)
    }
}

/// `v(c) = exp(-(√(c²+4) - c)² / 8)`.
#[inline]
pub fn vapor_sigmoid(c: f64) -> f64 {
    let gap = if c > 0.0 {
        // same quantity, without cancellation for large c
        4.0 / ((c * c + 4.0).sqrt() + c)
    } else {
        (c * c + 4.0).sqrt() - c
    };
    (-gap * gap / 8.0).exp()
}

/// Inverse of [`vapor_sigmoid`] for `r ∈ (0, 1)`:
/// `1/√(-2 ln r) - √(-2 ln r)`.
pub fn vapor_sigmoid_inverse(r: f64) -> f64 {
    let t = (-2.0 * r.ln()).sqrt();
    1.0 / t - t
}

/// Final state of a threshold bisection.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdSearchState {
    pub kappa_low: f64,
    pub kappa_up: f64,
    pub iterations: usize,
    /// `max_x S_x(κ_low) - S_x(κ_up)` at exit.
    pub max_error: f64,
    /// Per-arm midpoint `(S_x(κ_low) + S_x(κ_up)) / 2`, not normalized.
    pub midpoints: Vec<f64>,
}

impl ThresholdSearchState {
    pub fn threshold(&self) -> f64 {
        0.5 * self.kappa_low + 0.5 * self.kappa_up
    }

    fn into_estimate(self, method: Method) -> PomEstimate {
        let kappa = self.threshold();
        let iterations = self.iterations;
        let max_error = self.max_error;
        let mut est = PomEstimate::normalized(method, self.midpoints);
        est.threshold = Some(kappa);
        est.iterations = iterations;
        est.max_error_bound = Some(max_error);
        est
    }
}

pub(crate) fn threshold_search<S: Sigmoid>(
    belief: &IndependentGaussianBelief,
    cfg: &ConvergenceConfig,
) -> Result<ThresholdSearchState, PomError> {
    threshold_search_observed::<S>(belief, cfg, |_, _, _| {})
}

/// Bisection with a hook called after initialization and after each step
/// as `(κ_low, κ_up, iteration)`.
pub(crate) fn threshold_search_observed<S: Sigmoid>(
    belief: &IndependentGaussianBelief,
    cfg: &ConvergenceConfig,
    mut observe: impl FnMut(f64, f64, usize),
) -> Result<ThresholdSearchState, PomError> {
    let n = belief.len();
    let eps = cfg.epsilon(n)?;
    let exec = cfg.exec;
    let (mu, sigma) = (belief.mu(), belief.sigma());

    let offset = -S::inverse(1.0 / n as f64);
    let mut kappa_low = belief.mu_min() + belief.sigma_min() * offset;
    let mut kappa_up = belief.mu_max() + belief.sigma_max() * offset;

    let eval_at = |kappa: f64, out: &mut [f64], exec: Exec| {
        exec.fill_sum(out, |x| S::eval((mu[x] - kappa) / sigma[x]))
    };
    let mut low_vals = vec![0.0; n];
    let mut up_vals = vec![0.0; n];
    let mut scratch = vec![0.0; n];
    eval_at(kappa_low, &mut low_vals, exec);
    eval_at(kappa_up, &mut up_vals, exec);
    observe(kappa_low, kappa_up, 0);

    let mut iterations = 0;
    loop {
        let max_error = exec.max(n, |x| low_vals[x] - up_vals[x]);
        if max_error < eps {
            let midpoints = exec.map(n, |x| 0.5 * (low_vals[x] + up_vals[x]));
            return Ok(ThresholdSearchState { kappa_low, kappa_up, iterations, max_error, midpoints });
        }
        if iterations >= cfg.max_iterations {
            return Err(PomError::MaxIterationsExceeded { method: S::METHOD, iterations });
        }
        let kappa = 0.5 * kappa_up + 0.5 * kappa_low;
        let s = eval_at(kappa, &mut scratch, exec);
        if s > 1.0 {
            kappa_low = kappa;
            std::mem::swap(&mut low_vals, &mut scratch);
        } else {
            kappa_up = kappa;
            std::mem::swap(&mut up_vals, &mut scratch);
        }
        iterations += 1;
        observe(kappa_low, kappa_up, iterations);
    }
}

/// F-LITE: `q_x = Φ((μ_x - κ*)/σ_x)` with `Σ q_x = 1`.
pub fn estimate_flite(belief: &IndependentGaussianBelief, cfg: &ConvergenceConfig) -> Result<PomEstimate, PomError> {
    Ok(flite_search(belief, cfg)?.into_estimate(Method::Flite))
}

/// F-LITE search state, exposing the bracket and unnormalized midpoints.
pub fn flite_search(
    belief: &IndependentGaussianBelief,
    cfg: &ConvergenceConfig,
) -> Result<ThresholdSearchState, PomError> {
    threshold_search::<NormalCdf>(belief, cfg)
}

/// F-VAPOR: `q_x = v((μ_x - ν*)/σ_x)` with `Σ q_x = 1`.
pub fn estimate_fvapor(belief: &IndependentGaussianBelief, cfg: &ConvergenceConfig) -> Result<PomEstimate, PomError> {
    Ok(fvapor_search(belief, cfg)?.into_estimate(Method::Fvapor))
}

pub fn fvapor_search(
    belief: &IndependentGaussianBelief,
    cfg: &ConvergenceConfig,
) -> Result<ThresholdSearchState, PomError> {
    threshold_search::<Vapor>(belief, cfg)
}

/// Jacobians of the F-LITE estimate at a converged threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct FliteGradients {
    /// Entry `(x, z)` is `∂q_x/∂μ_z`.
    pub dq_dmu: DMatrix<f64>,
    /// Entry `(x, z)` is `∂q_x/∂σ_z`.
    pub dq_dsigma: DMatrix<f64>,
}

/// Sensitivities of F-LITE to the belief.
///
/// With `h_x = φ((μ_x-κ*)/σ_x)/σ_x`:
/// `∂q_x/∂μ_z = h_x (1{x=z} - h_z/Σh)` and
/// `∂q_x/∂σ_z = ∂q_x/∂μ_z · (κ* - μ_z)/σ_z`.
pub fn flite_gradients(belief: &IndependentGaussianBelief, kappa_star: f64) -> FliteGradients {
    let (mu, sigma) = (belief.mu(), belief.sigma());
    let n = belief.len();
    let h: Vec<f64> = (0..n).map(|x| std_normal_pdf((mu[x] - kappa_star) / sigma[x]) / sigma[x]).collect();
    let total: f64 = h.iter().sum();
    let dq_dmu = DMatrix::from_fn(n, n, |x, z| {
        let delta = if x == z { 1.0 } else { 0.0 };
        h[x] * (delta - h[z] / total)
    });
    let dq_dsigma = DMatrix::from_fn(n, n, |x, z| dq_dmu[(x, z)] * (kappa_star - mu[z]) / sigma[z]);
    FliteGradients { dq_dmu, dq_dsigma }
}
