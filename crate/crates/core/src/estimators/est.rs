//! EST: improvement-threshold baseline.
//!
//! `p̃_x ∝ P[F̃_x ≥ κ̃] / (1 - P[F̃_x ≥ κ̃]) · Π_z P[F̃_z ≤ κ̃]` with
//! `κ̃ = E[max_z F̃_z]`, normalized to the simplex.

use crate::error::PomError;
use crate::estimators::grid::{expected_maximum, shared_integration_grid};
use crate::gauss::std_normal_log_cdf;
use crate::types::{ConvergenceConfig, IndependentGaussianBelief, Method, PomEstimate};

/// Largest admissible `P[F̃_x ≥ κ̃]` before the odds ratio is declared degenerate.
const MAX_EXCEEDANCE: f64 = 1.0 - 1e-15;

pub fn estimate_est(belief: &IndependentGaussianBelief, cfg: &ConvergenceConfig) -> Result<PomEstimate, PomError> {
    let eps = cfg.grid_epsilon(belief.len())?;
    let grid_eps = eps.max(cfg.est_grid_floor).min(0.25);
    let grid = shared_integration_grid(belief, grid_eps, cfg.max_grid_points)?;
    let kappa = expected_maximum(belief, &grid, cfg.exec);
    est_at_threshold(belief, kappa, cfg)
}

/// EST scores for a given threshold.
pub fn est_at_threshold(
    belief: &IndependentGaussianBelief,
    kappa: f64,
    cfg: &ConvergenceConfig,
) -> Result<PomEstimate, PomError> {
    let (mu, sigma) = (belief.mu(), belief.sigma());
    let n = belief.len();
    let exec = cfg.exec;

    // ln of Π_z P[F̃_z ≤ κ̃], shared by every arm
    let log_below = exec.sum(n, |z| std_normal_log_cdf((kappa - mu[z]) / sigma[z]));
    let log_odds = exec.map(n, |x| {
        let c = (mu[x] - kappa) / sigma[x];
        (std_normal_log_cdf(c), std_normal_log_cdf(-c))
    });
    if let Some(x) = log_odds.iter().position(|&(up, _)| up.exp() >= MAX_EXCEEDANCE) {
        return Err(PomError::DegenerateRatio(x));
    }
    let scores: Vec<f64> = log_odds.iter().map(|&(up, down)| up - down + log_below).collect();
    let top = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let shifted: Vec<f64> = scores.iter().map(|s| (s - top).exp()).collect();

    let mut est = PomEstimate::normalized(Method::Est, shifted);
    est.raw = Some(scores.iter().map(|s| s.exp()).collect());
    est.threshold = Some(kappa);
    Ok(est)
}
