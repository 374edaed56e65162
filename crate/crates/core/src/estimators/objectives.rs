//! Variational objectives maximized by F-LITE (`W`) and F-VAPOR (`V`).

use crate::error::PomError;
use crate::gauss::{quantile, DomainError};
use crate::types::IndependentGaussianBelief;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;
const SIMPLEX_TOL: f64 = 1e-9;

/// Quasi-surprisal `Ĩ(u) = (φ(Φ⁻¹(u))/u)² / 2` for `u ∈ (0, 1]`.
pub fn quasi_surprisal(u: f64) -> Result<f64, DomainError> {
    if !(u > 0.0 && u <= 1.0) {
        return Err(DomainError(u));
    }
    if u == 1.0 {
        return Ok(0.0);
    }
    let z = quantile(u);
    // ln(φ(z)/u) = -z²/2 - ln√(2π) - ln u
    let log_ratio = -0.5 * z * z - LN_SQRT_2PI - u.ln();
    Ok(0.5 * (2.0 * log_ratio).exp())
}

fn check_simplex(belief: &IndependentGaussianBelief, p: &[f64]) -> Result<(), PomError> {
    if p.len() != belief.len() {
        return Err(PomError::SimplexViolation(format!("{} weights for {} arms", p.len(), belief.len())));
    }
    if let Some(i) = p.iter().position(|&v| !(0.0..=1.0).contains(&v)) {
        return Err(PomError::SimplexViolation(format!("weight {} at index {i}", p[i])));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > SIMPLEX_TOL {
        return Err(PomError::SimplexViolation(format!("weights sum to {total}")));
    }
    Ok(())
}

/// `W(p) = Σ p_x (μ_x + √(2Ĩ(p_x)) σ_x)`, maximized by the F-LITE estimate.
///
/// Zero weights contribute nothing (the limit of `p √Ĩ(p)` as `p → 0`).
pub fn objective_w(belief: &IndependentGaussianBelief, p: &[f64]) -> Result<f64, PomError> {
    check_simplex(belief, p)?;
    let (mu, sigma) = (belief.mu(), belief.sigma());
    let mut total = 0.0;
    for x in 0..p.len() {
        if p[x] > 0.0 {
            total += p[x] * (mu[x] + (2.0 * quasi_surprisal(p[x])?).sqrt() * sigma[x]);
        }
    }
    Ok(total)
}

/// `V(p) = Σ p_x (μ_x + √(2 ln(1/p_x)) σ_x)`, maximized by the F-VAPOR estimate.
pub fn objective_v(belief: &IndependentGaussianBelief, p: &[f64]) -> Result<f64, PomError> {
    check_simplex(belief, p)?;
    let (mu, sigma) = (belief.mu(), belief.sigma());
    Ok((0..p.len())
        .filter(|&x| p[x] > 0.0)
        .map(|x| p[x] * (mu[x] + (-2.0 * p[x].ln()).sqrt() * sigma[x]))
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn surprisal_values() {
        assert_eq!(quasi_surprisal(1.0).unwrap(), 0.0);
        assert_abs_diff_eq!(quasi_surprisal(0.5).unwrap(), 1.0 / PI, epsilon = 1e-14);
        assert!(quasi_surprisal(0.0).is_err());
        assert!(quasi_surprisal(1.5).is_err());
        let ratios: Vec<f64> =
            [1e-3, 1e-6, 1e-12].iter().map(|&u| quasi_surprisal(u).unwrap() / -u.ln()).collect();
        assert!(ratios[0] < ratios[1] && ratios[1] < ratios[2] && ratios[2] < 1.0);
    }

    #[test]
    fn surprisal_below_log_loss() {
        for i in 1..2000 {
            let u = i as f64 / 2000.0;
            assert!(quasi_surprisal(u).unwrap() <= -u.ln() + 1e-12, "u = {u}");
        }
    }

    #[test]
    fn objective_examples() {
        let b = IndependentGaussianBelief::new(vec![1.0; 4], vec![2.0; 4]).unwrap();
        let p = [0.25; 4];
        assert_abs_diff_eq!(objective_v(&b, &p).unwrap(), 1.0 + (2.0 * 4f64.ln()).sqrt() * 2.0, epsilon = 1e-12);
        assert!(objective_v(&b, &p).unwrap() >= objective_w(&b, &p).unwrap());
        let b = IndependentGaussianBelief::new(vec![0.5, 2.0], vec![1.0, 3.0]).unwrap();
        assert_eq!(objective_w(&b, &[0.0, 1.0]).unwrap(), 2.0);
        assert_eq!(objective_v(&b, &[1.0, 0.0]).unwrap(), 0.5);
        assert!(objective_w(&b, &[0.5, 0.6]).is_err());
        assert_eq!(
            objective_v(&b, &[-0.5, 1.5]).unwrap_err().to_string(),
            "not a probability vector: weight -0.5 at index 0"
        );
    }
}
