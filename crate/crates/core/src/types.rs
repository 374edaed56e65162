//! Beliefs, estimates and convergence settings shared by every estimator.

use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use nalgebra::DMatrix;
use thiserror::Error;

use crate::par::Exec;

/// Why a belief could not be constructed.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum BeliefError {
    #[error("mean has {mu} entries but the spread has {other}")]
    LengthMismatch { mu: usize, other: usize },
    #[error("standard deviation at index {0} is not positive")]
    NonPositiveSigma(usize),
    #[error("entry at index {0} is not finite")]
    NonFinite(usize),
    #[error("domain has {0} arms, at least 2 are required")]
    DomainTooSmall(usize),
    #[error("covariance is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("covariance is not symmetric at ({0}, {1})")]
    Asymmetric(usize, usize),
    #[error("covariance diagonal at index {0} is negative")]
    NegativeVariance(usize),
}

/// Independent Gaussian belief: arm `x` is `N(mu[x], sigma[x]²)`.
#[derive(Debug, Clone, PartialEq)]
pub struct IndependentGaussianBelief {
    mu: Vec<f64>,
    sigma: Vec<f64>,
    mu_min: f64,
    mu_max: f64,
    sigma_min: f64,
    sigma_max: f64,
}

impl IndependentGaussianBelief {
    pub fn new(mu: Vec<f64>, sigma: Vec<f64>) -> Result<Self, BeliefError> {
        if mu.len() != sigma.len() {
            return Err(BeliefError::LengthMismatch { mu: mu.len(), other: sigma.len() });
        }
        if mu.len() < 2 {
            return Err(BeliefError::DomainTooSmall(mu.len()));
        }
        for (i, (&m, &s)) in mu.iter().zip(&sigma).enumerate() {
            if !m.is_finite() || !s.is_finite() {
                return Err(BeliefError::NonFinite(i));
            }
            if s <= 0.0 {
                return Err(BeliefError::NonPositiveSigma(i));
            }
        }
        let fold = |v: &[f64]| {
            v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)))
        };
        let (mu_min, mu_max) = fold(&mu);
        let (sigma_min, sigma_max) = fold(&sigma);
        Ok(Self { mu, sigma, mu_min, mu_max, sigma_min, sigma_max })
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    pub fn len(&self) -> usize {
        self.mu.len()
    }

    /// Always false; beliefs hold at least two arms.
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn mu_min(&self) -> f64 {
        self.mu_min
    }

    pub fn mu_max(&self) -> f64 {
        self.mu_max
    }

    pub fn sigma_min(&self) -> f64 {
        self.sigma_min
    }

    pub fn sigma_max(&self) -> f64 {
        self.sigma_max
    }

    /// Full belief with a diagonal covariance.
    pub fn to_full(&self) -> FullGaussianBelief {
        let cov = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            self.len(),
            self.sigma.iter().map(|s| s * s),
        ));
        FullGaussianBelief { mu: self.mu.clone(), cov }
    }
}

/// Same as [`IndependentGaussianBelief::new`].
pub fn validate_belief(raw_mu: Vec<f64>, raw_sigma: Vec<f64>) -> Result<IndependentGaussianBelief, BeliefError> {
    IndependentGaussianBelief::new(raw_mu, raw_sigma)
}

/// Gaussian belief with a dense covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct FullGaussianBelief {
    mu: Vec<f64>,
    cov: DMatrix<f64>,
}

impl FullGaussianBelief {
    /// Symmetry is checked to `1e-10` relative to the largest diagonal entry.
    /// Positive semidefiniteness is checked later by the consumers that
    /// factorize the matrix.
    pub fn new(mu: Vec<f64>, cov: DMatrix<f64>) -> Result<Self, BeliefError> {
        if cov.nrows() != cov.ncols() {
            return Err(BeliefError::NotSquare { rows: cov.nrows(), cols: cov.ncols() });
        }
        if cov.nrows() != mu.len() {
            return Err(BeliefError::LengthMismatch { mu: mu.len(), other: cov.nrows() });
        }
        let n = mu.len();
        if n < 2 {
            return Err(BeliefError::DomainTooSmall(n));
        }
        if let Some(i) = mu.iter().position(|m| !m.is_finite()) {
            return Err(BeliefError::NonFinite(i));
        }
        let mut scale: f64 = 0.0;
        for i in 0..n {
            let d = cov[(i, i)];
            if !d.is_finite() {
                return Err(BeliefError::NonFinite(i));
            }
            if d < 0.0 {
                return Err(BeliefError::NegativeVariance(i));
            }
            scale = scale.max(d);
        }
        let tol = 1e-10 * scale.max(1.0);
        for i in 0..n {
            for j in (i + 1)..n {
                let (a, b) = (cov[(i, j)], cov[(j, i)]);
                if !a.is_finite() || !b.is_finite() {
                    return Err(BeliefError::NonFinite(i));
                }
                if (a - b).abs() > tol {
                    return Err(BeliefError::Asymmetric(i, j));
                }
            }
        }
        Ok(Self { mu, cov })
    }

    pub fn from_rows(mu: Vec<f64>, rows: &[Vec<f64>]) -> Result<Self, BeliefError> {
        let n = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(BeliefError::NotSquare { rows: n, cols: bad.len() });
        }
        let cov = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
        Self::new(mu, cov)
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    pub fn len(&self) -> usize {
        self.mu.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Drop the correlations. Fails if any variance is zero.
    pub fn diagonal_belief(&self) -> Result<IndependentGaussianBelief, BeliefError> {
        let sigma = (0..self.len()).map(|i| self.cov[(i, i)].sqrt()).collect();
        IndependentGaussianBelief::new(self.mu.clone(), sigma)
    }
}

/// Which estimator produced an estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Flite,
    Alite,
    Fvapor,
    Est,
    Independence,
    Tsmc,
}

impl Method {
    pub const ALL: [Method; 6] =
        [Method::Flite, Method::Alite, Method::Fvapor, Method::Est, Method::Independence, Method::Tsmc];

    pub fn tag(self) -> &'static str {
        match self {
            Method::Flite => "flite",
            Method::Alite => "alite",
            Method::Fvapor => "fvapor",
            Method::Est => "est",
            Method::Independence => "indep",
            Method::Tsmc => "tsmc",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown estimator `{0}`")]
pub struct UnknownMethod(pub String);

impl FromStr for Method {
    type Err = UnknownMethod;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "flite" | "f-lite" => Ok(Method::Flite),
            "alite" | "a-lite" => Ok(Method::Alite),
            "fvapor" | "f-vapor" => Ok(Method::Fvapor),
            "est" => Ok(Method::Est),
            "indep" | "independence" => Ok(Method::Independence),
            "tsmc" | "ts-mc" => Ok(Method::Tsmc),
            _ => Err(UnknownMethod(s.to_string())),
        }
    }
}

/// Probability-of-maximality estimate plus diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct PomEstimate {
    /// Normalized probabilities, one per arm.
    pub probs: Vec<f64>,
    pub method: Method,
    /// Shared threshold (κ*, ν* or κ̃), in reward units.
    pub threshold: Option<f64>,
    /// Bisection steps, final search depth, or sample count, depending on the method.
    pub iterations: usize,
    pub max_error_bound: Option<f64>,
    /// Values before the final normalization, when the method has them.
    pub raw: Option<Vec<f64>>,
}

impl PomEstimate {
    pub(crate) fn normalized(method: Method, raw: Vec<f64>) -> Self {
        let total: f64 = raw.iter().sum();
        let probs = raw.iter().map(|v| v / total).collect();
        Self { probs, method, threshold: None, iterations: 0, max_error_bound: None, raw: Some(raw) }
    }

    pub fn argmax(&self) -> usize {
        crate::metrics::argmax(&self.probs)
    }
}

/// Requested accuracy, either absolute or relative to the domain size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Accuracy {
    Epsilon(f64),
    /// `ε = 1 / (α·|X|)`.
    Alpha(f64),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("accuracy parameter must be positive and finite, got {0}")]
    InvalidAccuracy(f64),
    #[error("epsilon {0} outside (0, 1/4]")]
    EpsilonOutOfRange(f64),
    #[error("mc delta must lie in (0, 1), got {0}")]
    InvalidDelta(f64),
}

/// Convergence settings shared by all estimators.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceConfig {
    pub accuracy: Accuracy,
    /// Cap on bisection steps for the threshold searches.
    pub max_iterations: usize,
    /// Failure probability for the Monte Carlo sample count.
    pub mc_delta: f64,
    /// Cap on the number of Monte Carlo samples.
    pub max_samples: u64,
    /// Cap on integration grid points.
    pub max_grid_points: usize,
    /// Coarsest accuracy used for the grid that locates EST's threshold.
    pub est_grid_floor: f64,
    /// Wall-clock budget for Monte Carlo estimation.
    pub deadline: Option<Duration>,
    pub exec: Exec,
}

impl ConvergenceConfig {
    pub fn with_epsilon(epsilon: f64) -> Self {
        Self::from_accuracy(Accuracy::Epsilon(epsilon))
    }

    pub fn with_alpha(alpha: f64) -> Self {
        Self::from_accuracy(Accuracy::Alpha(alpha))
    }

    pub fn from_accuracy(accuracy: Accuracy) -> Self {
        Self {
            accuracy,
            max_iterations: 200,
            mc_delta: 0.05,
            max_samples: 2_000_000_000,
            max_grid_points: 50_000_000,
            est_grid_floor: 1e-3,
            deadline: None,
            exec: Exec::default(),
        }
    }

    pub fn max_iterations(mut self, n: usize) -> Self {
        self.max_iterations = n;
        self
    }

    pub fn mc_delta(mut self, delta: f64) -> Self {
        self.mc_delta = delta;
        self
    }

    pub fn exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }

    pub fn deadline(mut self, deadline: Option<Duration>) -> Self {
        self.deadline = deadline;
        self
    }

    /// Resolve ε for a domain of `n` arms.
    pub fn epsilon(&self, n: usize) -> Result<f64, ConfigError> {
        let eps = match self.accuracy {
            Accuracy::Epsilon(e) => {
                if !(e.is_finite() && e > 0.0) {
                    return Err(ConfigError::InvalidAccuracy(e));
                }
                e
            }
            Accuracy::Alpha(a) => {
                if !(a.is_finite() && a > 0.0) {
                    return Err(ConfigError::InvalidAccuracy(a));
                }
                1.0 / (a * n as f64)
            }
        };
        Ok(eps)
    }

    /// ε restricted to `(0, 1/4]`, as the integration grid requires.
    pub fn grid_epsilon(&self, n: usize) -> Result<f64, ConfigError> {
        let eps = self.epsilon(n)?;
        if eps > 0.25 {
            return Err(ConfigError::EpsilonOutOfRange(eps));
        }
        Ok(eps)
    }

    pub(crate) fn delta(&self) -> Result<f64, ConfigError> {
        if self.mc_delta > 0.0 && self.mc_delta < 1.0 {
            Ok(self.mc_delta)
        } else {
            Err(ConfigError::InvalidDelta(self.mc_delta))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validate_examples() {
        let b = validate_belief(vec![0.0, 1.0], vec![1.0, 1.0]).unwrap();
        assert_eq!(b.mu_max(), 1.0);
        assert_eq!(b.sigma_min(), 1.0);
        assert_eq!(validate_belief(vec![0.0], vec![1.0]), Err(BeliefError::DomainTooSmall(1)));
        assert_eq!(
            validate_belief(vec![0.0, 1.0], vec![1.0, -1.0]),
            Err(BeliefError::NonPositiveSigma(1))
        );
        assert_eq!(
            validate_belief(vec![0.0, 1.0], vec![1.0]),
            Err(BeliefError::LengthMismatch { mu: 2, other: 1 })
        );
        assert_eq!(
            validate_belief(vec![0.0, f64::NAN], vec![1.0, 1.0]),
            Err(BeliefError::NonFinite(1))
        );
        assert_eq!(
            validate_belief(vec![0.0, 1.0], vec![0.0, 1.0]),
            Err(BeliefError::NonPositiveSigma(0))
        );
    }

    #[test]
    fn full_belief_checks() {
        let ok = FullGaussianBelief::from_rows(vec![0.0, 1.0], &[vec![4.0, 1.0], vec![1.0, 9.0]]).unwrap();
        let d = ok.diagonal_belief().unwrap();
        assert_eq!(d.sigma(), &[2.0, 3.0]);
        assert_eq!(
            FullGaussianBelief::from_rows(vec![0.0, 1.0], &[vec![1.0, 0.5], vec![0.4, 1.0]]),
            Err(BeliefError::Asymmetric(0, 1))
        );
        assert_eq!(
            FullGaussianBelief::from_rows(vec![0.0, 1.0], &[vec![-1.0, 0.0], vec![0.0, 1.0]]),
            Err(BeliefError::NegativeVariance(0))
        );
        let zero = FullGaussianBelief::from_rows(vec![0.0, 1.0], &[vec![0.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert_eq!(zero.diagonal_belief(), Err(BeliefError::NonPositiveSigma(0)));
    }

    #[test]
    fn accuracy_resolution() {
        assert_eq!(ConvergenceConfig::with_alpha(2.0).epsilon(100).unwrap(), 1.0 / 200.0);
        assert!(ConvergenceConfig::with_epsilon(0.3).grid_epsilon(10).is_err());
        assert!(ConvergenceConfig::with_epsilon(-1.0).epsilon(10).is_err());
        assert!(ConvergenceConfig::with_epsilon(0.1).mc_delta(1.0).delta().is_err());
    }

    #[test]
    fn method_tags_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.tag().parse::<Method>().unwrap(), m);
        }
        assert!("nope".parse::<Method>().is_err());
    }
}
