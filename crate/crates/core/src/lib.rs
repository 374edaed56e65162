//! Probability of maximality for Gaussian beliefs.
//!
//! Given independent arms `F_x ~ N(μ_x, σ_x²)` (or a full covariance), the
//! probability of maximality of arm `x` is `P[F_x ≥ F_z for all z]`. This
//! crate estimates it with fast threshold methods (F-LITE, F-VAPOR), a
//! quartile-matching method (A-LITE), an improvement-threshold baseline
//! (EST), an error-bounded quadrature of the independence integral, and a
//! Monte Carlo reference (TS-MC) for correlated beliefs.
//!
//! ```
//! use pom_lite::{estimate_flite, ConvergenceConfig, IndependentGaussianBelief};
//!
//! let belief = IndependentGaussianBelief::new(vec![0.0, 1.0], vec![1.0, 1.0]).unwrap();
//! let est = estimate_flite(&belief, &ConvergenceConfig::with_epsilon(1e-9)).unwrap();
//! assert!((est.probs[1] - 0.691462).abs() < 1e-6);
//! ```

pub mod bench;
pub mod error;
pub mod estimators;
pub mod gauss;
pub mod metrics;
pub mod par;
pub mod rng;
pub mod types;

pub use error::PomError;
pub use estimators::{
    alite_detailed, estimate, estimate_alite, estimate_est, estimate_flite, estimate_fvapor, estimate_independence,
    estimate_tsmc, flite_gradients, flite_search, objective_v, objective_w, quasi_surprisal, shared_integration_grid,
};
pub use gauss::{std_normal_cdf, std_normal_log_cdf, std_normal_pdf, std_normal_quantile};
pub use metrics::{entropy_rmsre, expected_recall, shannon_entropy, top_k, tv_distance, RecallCurve};
pub use par::Exec;
pub use rng::SeededRng;
pub use types::{
    validate_belief, Accuracy, BeliefError, ConvergenceConfig, FullGaussianBelief, IndependentGaussianBelief, Method,
    PomEstimate,
};
