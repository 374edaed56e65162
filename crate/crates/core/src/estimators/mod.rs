//! Probability-of-maximality estimators.

pub mod alite;
pub mod est;
pub mod grid;
pub mod objectives;
pub mod threshold;
pub mod tsmc;

pub use alite::{alite_detailed, estimate_alite, AliteOutcome, QuartileInterval};
pub use est::estimate_est;
pub use grid::{
    estimate_independence, expected_maximum, independence_detailed, shared_integration_grid, IndependenceEstimate,
    IntegrationGrid,
};
pub use objectives::{objective_v, objective_w, quasi_surprisal};
pub use threshold::{
    estimate_flite, estimate_fvapor, flite_gradients, flite_search, fvapor_search, vapor_sigmoid,
    vapor_sigmoid_inverse, FliteGradients, ThresholdSearchState,
};
pub use tsmc::{
    estimate_tsmc, tsmc_detailed, tsmc_sample_count, tsmc_with_samples, GaussianSampler, TsmcOutcome,
};

use crate::error::PomError;
use crate::types::{ConvergenceConfig, IndependentGaussianBelief, Method, PomEstimate};
use crate::SeededRng;

/// Run any estimator on an independent belief. TS-MC samples from the
/// diagonal covariance and needs `rng`.
pub fn estimate(
    method: Method,
    belief: &IndependentGaussianBelief,
    cfg: &ConvergenceConfig,
    rng: Option<&mut SeededRng>,
) -> Result<PomEstimate, PomError> {
    match method {
        Method::Flite => estimate_flite(belief, cfg),
        Method::Alite => estimate_alite(belief, cfg),
        Method::Fvapor => estimate_fvapor(belief, cfg),
        Method::Est => estimate_est(belief, cfg),
        Method::Independence => estimate_independence(belief, cfg),
        Method::Tsmc => {
            let mut fallback = SeededRng::new(0);
            estimate_tsmc(&belief.to_full(), cfg, rng.unwrap_or(&mut fallback))
        }
    }
}
