//! Error-controlled trapezoid quadrature of the independence integral
//! `p_x = E[g^x(F_x)]`, `g^x(f) = Π_{z≠x} Φ((f-μ_z)/σ_z)`.

use std::f64::consts::PI;

use crate::error::PomError;
use crate::gauss::{quantile, std_normal_cdf, NormalTail};
use crate::par::Exec;
use crate::types::{ConvergenceConfig, IndependentGaussianBelief, Method, PomEstimate};

/// Standardized distance beyond which `Φ` is treated as exactly 1.
const UPPER_CUTOFF: f64 = 9.0;
/// `ln` of a contribution small enough to drop (`e^-60 ≈ 9e-27`).
const LOG_NEGLIGIBLE: f64 = -60.0;
/// Grid points handled per parallel batch in the top-down sweep.
const SWEEP_BATCH: usize = 1024;

/// Quadrature nodes `f_0 = -∞ < f_1 < … < f_{n-1} < f_n = +∞` with
/// equidistant interior points.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegrationGrid {
    /// Number of cells; the grid has `n + 1` nodes.
    pub n: usize,
    /// First interior node `f_1`.
    pub start: f64,
    /// Spacing of interior nodes (0 when there is a single interior node).
    pub step: f64,
    /// `ε̃ = -Φ⁻¹(2ε)`.
    pub eps_tilde: f64,
}

impl IntegrationGrid {
    /// Node `f_i` for `0 ≤ i ≤ n`.
    pub fn point(&self, i: usize) -> f64 {
        if i == 0 {
            f64::NEG_INFINITY
        } else if i >= self.n {
            f64::INFINITY
        } else {
            self.start + (i - 1) as f64 * self.step
        }
    }

    /// Interior nodes `f_1 … f_{n-1}`.
    pub fn interior(&self) -> impl Iterator<Item = f64> + '_ {
        (1..self.n).map(|i| self.point(i))
    }

    /// All `n + 1` nodes including the infinite ends.
    pub fn points(&self) -> Vec<f64> {
        (0..=self.n).map(|i| self.point(i)).collect()
    }

    fn interior_len(&self) -> usize {
        self.n - 1
    }
}

/// Grid guaranteeing per-arm quadrature error at most `epsilon`.
///
/// `n = ⌈(μ_max - μ_min + 2ε̃σ_max) / (2√(2π)·σ_min·ε)⌉ + 2`, interior
/// nodes spread evenly over `[μ_min - ε̃σ_max, μ_max + ε̃σ_max]`.
pub fn shared_integration_grid(
    belief: &IndependentGaussianBelief,
    epsilon: f64,
    max_points: usize,
) -> Result<IntegrationGrid, PomError> {
    if !(epsilon > 0.0 && epsilon <= 0.25) {
        return Err(crate::types::ConfigError::EpsilonOutOfRange(epsilon).into());
    }
    let eps_tilde = -quantile(2.0 * epsilon);
    let width = belief.mu_max() - belief.mu_min() + 2.0 * eps_tilde * belief.sigma_max();
    let cells = (width / (epsilon * 2.0 * (2.0 * PI).sqrt() * belief.sigma_min())).ceil() + 2.0;
    if !cells.is_finite() || cells > max_points as f64 {
        return Err(PomError::GridTooLarge { points: cells, limit: max_points });
    }
    let n = cells as usize;
    let step = if n > 2 { width / (n - 2) as f64 } else { 0.0 };
    Ok(IntegrationGrid { n, start: belief.mu_min() - eps_tilde * belief.sigma_max(), step, eps_tilde })
}

/// `ln g(f_i)` on the interior nodes, computed from the top down and
/// abandoned once every `g^x` is negligible.
pub(crate) struct LogProduct {
    /// Index (into interior nodes, 0-based) of the lowest node evaluated.
    pub first: usize,
    /// `ln g` for interior nodes `first..`.
    pub values: Vec<f64>,
}

impl LogProduct {
    pub(crate) fn at(&self, interior_index: usize) -> f64 {
        if interior_index < self.first {
            f64::NEG_INFINITY
        } else {
            self.values[interior_index - self.first]
        }
    }
}

pub(crate) fn log_product(belief: &IndependentGaussianBelief, grid: &IntegrationGrid, exec: Exec) -> LogProduct {
    let (mu, sigma) = (belief.mu(), belief.sigma());
    let m = grid.interior_len();
    // (ln g, min_x ln Φ_x) at interior node j
    let node = |j: usize| {
        let f = grid.point(j + 1);
        let mut lg = 0.0;
        let mut min_term: f64 = 0.0;
        for x in 0..mu.len() {
            let z = (f - mu[x]) / sigma[x];
            if z > UPPER_CUTOFF {
                continue;
            }
            let t = NormalTail::new(z).log_cdf();
            lg += t;
            min_term = min_term.min(t);
        }
        (lg, min_term)
    };

    let mut rev: Vec<f64> = Vec::with_capacity(m.min(1 << 16));
    let mut hi = m;
    while hi > 0 {
        let lo = hi.saturating_sub(SWEEP_BATCH);
        let batch = exec.map(hi - lo, |k| node(hi - 1 - k));
        let mut done = false;
        for (lg, min_term) in batch {
            rev.push(lg);
            // every g^x = g/Φ_x is below e^LOG_NEGLIGIBLE here and further down
            if lg - min_term < LOG_NEGLIGIBLE {
                done = true;
                break;
            }
        }
        if done {
            break;
        }
        hi = lo;
    }
    rev.reverse();
    LogProduct { first: m - rev.len(), values: rev }
}

/// Trapezoid estimate together with its unnormalized per-arm values.
#[derive(Debug, Clone, PartialEq)]
pub struct IndependenceEstimate {
    pub estimate: PomEstimate,
    /// `q̃_x` before normalization; within `ε` of the exact integral.
    pub raw: Vec<f64>,
    pub grid: IntegrationGrid,
}

/// Independence estimator with per-arm error at most `ε` before
/// normalization.
pub fn estimate_independence(
    belief: &IndependentGaussianBelief,
    cfg: &ConvergenceConfig,
) -> Result<PomEstimate, PomError> {
    Ok(independence_detailed(belief, cfg)?.estimate)
}

pub fn independence_detailed(
    belief: &IndependentGaussianBelief,
    cfg: &ConvergenceConfig,
) -> Result<IndependenceEstimate, PomError> {
    let eps = cfg.grid_epsilon(belief.len())?;
    let grid = shared_integration_grid(belief, eps, cfg.max_grid_points)?;
    let lp = log_product(belief, &grid, cfg.exec);
    let (mu, sigma) = (belief.mu(), belief.sigma());
    let m = grid.interior_len();

    let raw = cfg.exec.map(belief.len(), |x| {
        let tail_at = |j: usize| NormalTail::new((grid.point(j + 1) - mu[x]) / sigma[x]);
        let gx = |j: usize, t: &NormalTail| (lp.at(j) - t.log_cdf()).exp();

        // lowest active node: the cells below it carry g^x < e^LOG_NEGLIGIBLE
        let j0 = lp.first;
        let mut prev = tail_at(j0);
        let mut g_prev = gx(j0, &prev);
        let mut acc = 0.5 * g_prev * prev.cdf();
        for j in (j0 + 1)..m {
            let cur = tail_at(j);
            let g_cur = gx(j, &cur);
            acc += 0.5 * (g_prev + g_cur) * NormalTail::mass_between(&prev, &cur);
            prev = cur;
            g_prev = g_cur;
            if (grid.point(j + 1) - mu[x]) / sigma[x] > UPPER_CUTOFF {
                break;
            }
        }
        // last cell reaches +∞ where g^x = 1
        acc + 0.5 * (g_prev + 1.0) * prev.sf()
    });

    let mut estimate = PomEstimate::normalized(Method::Independence, raw.clone());
    estimate.iterations = grid.n;
    estimate.max_error_bound = Some(eps);
    Ok(IndependenceEstimate { estimate, raw, grid })
}

/// `E[max_x F̃_x] ≈ hi - ∫_lo^hi G(f) df` with `G = Π_x Φ((f-μ_x)/σ_x)`.
///
/// `lo` is the start of `grid`, where `G ≤ 2ε`. `hi` is the first point
/// with `Σ_x P[F̃_x > f] ≤ 2ε`; the per-arm window alone can leave up to
/// `|X|·2ε` of the maximum's mass above it. The integral uses Simpson's
/// rule, doubling the node count until two rounds agree to `ε` or the
/// spacing of `grid` is reached.
pub fn expected_maximum(belief: &IndependentGaussianBelief, grid: &IntegrationGrid, exec: Exec) -> f64 {
    if grid.step <= 0.0 {
        return grid.point(1);
    }
    let (mu, sigma) = (belief.mu(), belief.sigma());
    let eps = 0.5 * std_normal_cdf(-grid.eps_tilde);
    let lo = grid.start;
    let hi = upper_edge(belief, grid, exec);
    let g = |f: f64| {
        let mut lg = 0.0;
        for x in 0..mu.len() {
            let z = (f - mu[x]) / sigma[x];
            if z <= UPPER_CUTOFF {
                lg += NormalTail::new(z).log_cdf();
            }
        }
        lg.exp()
    };
    let max_cells = ((hi - lo) / grid.step).ceil().max(MIN_CELLS as f64);
    let mut cells = MIN_CELLS / 4;
    let mut h = (hi - lo) / cells as f64;
    let mut trapezoid = 0.5 * h * (g(lo) + g(hi)) + h * exec.sum(cells - 1, |i| g(lo + (i + 1) as f64 * h));
    let mut simpson = f64::NAN;
    loop {
        let mids = exec.sum(cells, |i| g(lo + (i as f64 + 0.5) * h));
        let refined = 0.5 * trapezoid + 0.5 * h * mids;
        let next = (4.0 * refined - trapezoid) / 3.0;
        cells *= 2;
        h *= 0.5;
        trapezoid = refined;
        let converged = cells >= MIN_CELLS && (next - simpson).abs() <= eps;
        simpson = next;
        if converged || cells as f64 >= max_cells {
            return hi - simpson;
        }
    }
}

/// Fewest cells accepted by the adaptive rule in `expected_maximum`.
const MIN_CELLS: usize = 256;

/// Smallest `f` at or above the last interior node of `grid` with
/// `Σ_x P[F̃_x > f] ≤ 2ε`, to within one grid step.
fn upper_edge(belief: &IndependentGaussianBelief, grid: &IntegrationGrid, exec: Exec) -> f64 {
    let (mu, sigma) = (belief.mu(), belief.sigma());
    let target = std_normal_cdf(-grid.eps_tilde);
    let tail = |f: f64| exec.sum(mu.len(), |x| std_normal_cdf((mu[x] - f) / sigma[x]));
    let mut lo = grid.point(grid.interior_len());
    if tail(lo) <= target {
        return lo;
    }
    // the union bound at one arm's 2ε/|X| quantile is at most 2ε
    let mut hi = belief.mu_max() - quantile(target / mu.len() as f64) * belief.sigma_max();
    while hi - lo > grid.step {
        let mid = 0.5 * (lo + hi);
        if tail(mid) <= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gauss::std_normal_cdf;
    use approx::assert_abs_diff_eq;

    fn belief(mu: &[f64], sigma: &[f64]) -> IndependentGaussianBelief {
        IndependentGaussianBelief::new(mu.to_vec(), sigma.to_vec()).unwrap()
    }

    #[test]
    fn degenerate_grid() {
        let b = belief(&[1.5, 1.5], &[2.0, 2.0]);
        let g = shared_integration_grid(&b, 0.25, 1000).unwrap();
        assert_eq!(g.eps_tilde, 0.0);
        assert_eq!(g.n, 2);
        assert_eq!(g.points(), vec![f64::NEG_INFINITY, 1.5, f64::INFINITY]);
    }

    #[test]
    fn grid_spacing_and_growth() {
        let b = belief(&[0.0, 1.0, 4.0], &[0.5, 2.0, 1.0]);
        for eps in [1e-2, 1e-3, 1e-4] {
            let g = shared_integration_grid(&b, eps, 10_000_000).unwrap();
            assert!(g.step <= 2.0 * (2.0 * PI).sqrt() * 0.5 * eps);
            let h = shared_integration_grid(&b, eps / 2.0, 10_000_000).unwrap();
            let ratio = h.n as f64 / g.n as f64;
            assert!((1.8..=2.3).contains(&ratio), "ratio {ratio}");
        }
        assert!(matches!(shared_integration_grid(&b, 1e-6, 1000), Err(PomError::GridTooLarge { .. })));
        assert!(shared_integration_grid(&b, 0.3, 1000).is_err());
    }

    #[test]
    fn two_arm_closed_form() {
        let b = belief(&[0.0, 1.0], &[1.0, 1.0]);
        let out = independence_detailed(&b, &ConvergenceConfig::with_epsilon(1e-4)).unwrap();
        let p0 = std_normal_cdf(-1.0 / 2f64.sqrt());
        assert_abs_diff_eq!(p0, 0.239_750_061_093_477_5, epsilon = 1e-15);
        assert_abs_diff_eq!(out.raw[0], p0, epsilon = 1e-4);
        assert_abs_diff_eq!(out.raw[1], 1.0 - p0, epsilon = 1e-4);
    }

    #[test]
    fn degenerate_grid_still_sums() {
        let b = belief(&[0.0, 0.0], &[1.0, 1.0]);
        let out = independence_detailed(&b, &ConvergenceConfig::with_epsilon(0.25)).unwrap();
        assert_abs_diff_eq!(out.raw[0], 0.5, epsilon = 1e-15);
        assert_eq!(out.estimate.probs, vec![0.5, 0.5]);
    }

    #[test]
    fn identical_arms_uniform() {
        let b = belief(&[1.0; 5], &[2.0; 5]);
        let out = independence_detailed(&b, &ConvergenceConfig::with_epsilon(1e-3)).unwrap();
        for q in &out.raw {
            assert_abs_diff_eq!(*q, 0.2, epsilon = 1e-3);
        }
    }

    #[test]
    fn mean_of_max_of_two_standard_normals() {
        let b = belief(&[0.0, 0.0], &[1.0, 1.0]);
        let g = shared_integration_grid(&b, 1e-4, 10_000_000).unwrap();
        let k = expected_maximum(&b, &g, Exec::Sequential);
        assert_abs_diff_eq!(k, 1.0 / PI.sqrt(), epsilon = 1e-4);
    }

    #[test]
    fn expected_maximum_of_many_arms() {
        // E[max of n iid N(0,1)], mpmath quadrature
        for (n, exact) in [(1000, 3.241_435_769_133_441), (10_000, 3.851_615_817_066_675)] {
            let b = belief(&vec![0.0; n], &vec![1.0; n]);
            let g = shared_integration_grid(&b, 1e-3, 10_000_000).unwrap();
            let k = expected_maximum(&b, &g, Exec::Sequential);
            assert_abs_diff_eq!(k, exact, epsilon = 1e-3);
        }
    }
}
