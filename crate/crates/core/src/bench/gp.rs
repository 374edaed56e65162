//! Gaussian-process models on a finite grid.

use nalgebra::{Cholesky, DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use super::BenchError;
use crate::rng::SeededRng;
use crate::types::FullGaussianBelief;

/// Relative diagonal jitter added before every factorization.
pub const JITTER: f64 = 1e-8;

/// Stationary covariance functions of the distance `d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kernel {
    /// `exp(-d²/(2ℓ²))`.
    SquaredExponential,
    /// `exp(-d/ℓ)`.
    Exponential,
    /// `(1 + √5·d/ℓ + 5d²/(3ℓ²))·exp(-√5·d/ℓ)`.
    Matern52,
}

impl Kernel {
    /// Correlation at distance `d` for length scale `ell`.
    pub fn correlation(self, d: f64, ell: f64) -> f64 {
        let r = d / ell;
        match self {
            Kernel::SquaredExponential => (-0.5 * r * r).exp(),
            Kernel::Exponential => (-r).exp(),
            Kernel::Matern52 => {
                let s = 5f64.sqrt() * r;
                (1.0 + s + s * s / 3.0) * (-s).exp()
            }
        }
    }
}

/// GP prior with constant mean and Gaussian observation noise, restricted
/// to an ordered grid of 1-D or 2-D points.
#[derive(Debug, Clone, PartialEq)]
pub struct GpModel {
    pub kernel: Kernel,
    pub length_scale: f64,
    /// Prior standard deviation; the kernel variance is `amplitude²`.
    pub amplitude: f64,
    pub noise_std: f64,
    pub mean: f64,
    pub grid: Vec<Vec<f64>>,
}

impl GpModel {
    pub fn new(
        kernel: Kernel,
        length_scale: f64,
        amplitude: f64,
        noise_std: f64,
        grid: Vec<Vec<f64>>,
    ) -> Result<Self, BenchError> {
        if !(length_scale > 0.0 && length_scale.is_finite()) {
            return Err(BenchError::InvalidConfig(format!("length scale must be positive, got {length_scale}")));
        }
        if !(amplitude > 0.0 && amplitude.is_finite()) {
            return Err(BenchError::InvalidConfig(format!("amplitude must be positive, got {amplitude}")));
        }
        if !(noise_std >= 0.0 && noise_std.is_finite()) {
            return Err(BenchError::InvalidConfig(format!("noise std must be non-negative, got {noise_std}")));
        }
        if grid.len() < 2 {
            return Err(BenchError::InvalidConfig("grid needs at least two points".into()));
        }
        Ok(Self { kernel, length_scale, amplitude, noise_std, mean: 0.0, grid })
    }

    /// `n` evenly spaced points on `[0, 1]`.
    pub fn unit_interval(n: usize) -> Vec<Vec<f64>> {
        let step = 1.0 / (n.max(2) - 1) as f64;
        (0..n).map(|i| vec![i as f64 * step]).collect()
    }

    /// `k × k` grid on `[lo, hi]²`, first coordinate varying slowest.
    pub fn square(k: usize, lo: f64, hi: f64) -> Vec<Vec<f64>> {
        let step = (hi - lo) / (k.max(2) - 1) as f64;
        let mut pts = Vec::with_capacity(k * k);
        for i in 0..k {
            for j in 0..k {
                pts.push(vec![lo + i as f64 * step, lo + j as f64 * step]);
            }
        }
        pts
    }

    pub fn with_mean(mut self, mean: f64) -> Self {
        self.mean = mean;
        self
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// Prior covariance between grid points `i` and `j`.
    pub fn k(&self, i: usize, j: usize) -> f64 {
        let d2: f64 = self.grid[i].iter().zip(&self.grid[j]).map(|(a, b)| (a - b) * (a - b)).sum();
        self.amplitude * self.amplitude * self.kernel.correlation(d2.sqrt(), self.length_scale)
    }

    /// Kernel matrix on the grid, without jitter.
    pub fn prior_cov(&self) -> DMatrix<f64> {
        let n = self.len();
        DMatrix::from_fn(n, n, |i, j| self.k(i, j))
    }

    fn jitter(&self) -> f64 {
        JITTER * self.amplitude * self.amplitude
    }

    /// Draw `f ~ GP(mean, k)` on the grid.
    pub fn sample_prior(&self, rng: &mut SeededRng) -> Result<Vec<f64>, BenchError> {
        let mut k = self.prior_cov();
        let j = self.jitter();
        for i in 0..self.len() {
            k[(i, i)] += j;
        }
        let chol = Cholesky::new(k).ok_or(BenchError::NotPsd)?;
        let z = DVector::from_fn(self.len(), |_, _| rng.sample::<f64, _>(StandardNormal));
        let f = chol.l() * z;
        Ok(f.iter().map(|v| v + self.mean).collect())
    }

    /// Posterior on the grid given noisy observations `(grid index, y)`.
    pub fn posterior(&self, observations: &[(usize, f64)]) -> Result<FullGaussianBelief, BenchError> {
        let n = self.len();
        for &(i, _) in observations {
            if i >= n {
                return Err(BenchError::OffGrid { index: i, len: n });
            }
        }
        let mut cov = self.prior_cov();
        if observations.is_empty() {
            return Ok(FullGaussianBelief::new(vec![self.mean; n], cov)?);
        }
        let m = observations.len();
        let noise = self.noise_std * self.noise_std + self.jitter();
        let a = DMatrix::from_fn(m, m, |r, c| {
            let v = self.k(observations[r].0, observations[c].0);
            if r == c {
                v + noise
            } else {
                v
            }
        });
        let chol = Cholesky::new(a).ok_or(BenchError::NotPsd)?;
        let l = chol.l();
        // V = L⁻¹ K_og, so that cov = K - VᵀV and mean = m + Vᵀ L⁻¹ (y - m)
        let k_og = DMatrix::from_fn(m, n, |r, c| self.k(observations[r].0, c));
        let v = l.solve_lower_triangular(&k_og).ok_or(BenchError::NotPsd)?;
        let resid = DVector::from_iterator(m, observations.iter().map(|&(_, y)| y - self.mean));
        let w = l.solve_lower_triangular(&resid).ok_or(BenchError::NotPsd)?;
        let mu_shift = v.tr_mul(&w);
        cov -= v.tr_mul(&v);
        symmetrize(&mut cov);
        let mu = mu_shift.iter().map(|d| self.mean + d).collect();
        Ok(FullGaussianBelief::new(mu, cov)?)
    }
}

/// Average the two triangles and clamp the diagonal at 0.
pub(crate) fn symmetrize(cov: &mut DMatrix<f64>) {
    let n = cov.nrows();
    for i in 0..n {
        if cov[(i, i)] < 0.0 {
            cov[(i, i)] = 0.0;
        }
        for j in (i + 1)..n {
            let a = 0.5 * (cov[(i, j)] + cov[(j, i)]);
            cov[(i, j)] = a;
            cov[(j, i)] = a;
        }
    }
}

/// Condition `N(mu, cov)` on `y = f_index + noise`, `noise ~ N(0, noise_var)`.
/// Returns the updated mean and covariance.
pub fn condition(
    mu: &[f64],
    cov: &DMatrix<f64>,
    index: usize,
    y: f64,
    noise_var: f64,
) -> (Vec<f64>, DMatrix<f64>) {
    let s = cov[(index, index)] + noise_var;
    let k = cov.column(index).into_owned();
    let gain = (y - mu[index]) / s;
    let mu_new = mu.iter().zip(k.iter()).map(|(m, ki)| m + ki * gain).collect();
    let mut cov_new = cov - &k * k.transpose() / s;
    symmetrize(&mut cov_new);
    (mu_new, cov_new)
}

/// Drop-wave test function, maximized at the origin with value 1.
pub fn dropwave(x1: f64, x2: f64) -> f64 {
    let r2 = x1 * x1 + x2 * x2;
    (1.0 + (12.0 * r2.sqrt()).cos()) / (0.5 * r2 + 2.0)
}
