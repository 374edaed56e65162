//! Standard-normal special functions.
//!
//! Everything the estimators need from the standard Gaussian: density,
//! distribution function (with accurate upper and lower tails), a
//! log-domain distribution function that stays finite far into the lower
//! tail, and the quantile function.

use std::f64::consts::FRAC_1_SQRT_2;

use thiserror::Error;

/// `1 / sqrt(2π)`.
pub const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;
/// `ln(sqrt(2π))`.
const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;
/// Below this point `log_cdf` uses the asymptotic tail series.
const LOG_CDF_SERIES_CUTOFF: f64 = -10.0;

/// Probability outside the open unit interval was handed to [`std_normal_quantile`].
#[derive(Debug, Clone, Copy, PartialEq, Error)]
#[error("probability {0} is outside (0, 1)")]
pub struct DomainError(pub f64);

/// Density `φ(x) = exp(-x²/2) / √(2π)`.
#[inline]
pub fn std_normal_pdf(x: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Distribution function `Φ(x)`. Both tails keep full relative accuracy
/// (the upper tail through `1 - Φ(-x)` only up to rounding at 1).
#[inline]
pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// Survival function `1 - Φ(x)` without cancellation.
#[inline]
pub fn std_normal_sf(x: f64) -> f64 {
    0.5 * libm::erfc(x * FRAC_1_SQRT_2)
}

/// `ln Φ(x)`.
///
/// For `x < -10` the value comes from the asymptotic expansion
/// `Φ(x) = φ(x)/(-x) · (1 - 1/x² + 3/x⁴ - 15/x⁶ + …)`, which never
/// underflows.
pub fn std_normal_log_cdf(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x < LOG_CDF_SERIES_CUTOFF {
        if x == f64::NEG_INFINITY {
            return f64::NEG_INFINITY;
        }
        return log_cdf_tail_series(x);
    }
    if x < 0.0 {
        std_normal_cdf(x).ln()
    } else {
        (-std_normal_sf(x)).ln_1p()
    }
}

fn log_cdf_tail_series(x: f64) -> f64 {
    let inv_x2 = 1.0 / (x * x);
    let mut sum = 1.0;
    let mut term = 1.0;
    let mut k = 1.0;
    loop {
        let next = -term * (2.0 * k - 1.0) * inv_x2;
        if next.abs() >= term.abs() || next.abs() < 1e-17 * sum {
            break;
        }
        sum += next;
        term = next;
        k += 1.0;
    }
    -0.5 * x * x - LN_SQRT_2PI - (-x).ln() + sum.ln()
}

/// Quantile function `Φ⁻¹(p)` for `p ∈ (0, 1)`.
pub fn std_normal_quantile(p: f64) -> Result<f64, DomainError> {
    if p > 0.0 && p < 1.0 {
        Ok(quantile(p))
    } else {
        Err(DomainError(p))
    }
}

/// Unchecked quantile: `-∞` at 0, `+∞` at 1, NaN outside.
pub(crate) fn quantile(p: f64) -> f64 {
    if p.is_nan() || !(0.0..=1.0).contains(&p) {
        return f64::NAN;
    }
    if p == 0.0 {
        return f64::NEG_INFINITY;
    }
    if p == 1.0 {
        return f64::INFINITY;
    }
    if p == 0.5 {
        return 0.0;
    }
    if p > 0.5 {
        -lower_quantile(1.0 - p)
    } else {
        lower_quantile(p)
    }
}

/// Acklam's rational approximation (relative error ≤ 1.15e-9) followed by
/// one Newton step on `Φ(z) - p`. Requires `0 < p < 0.5`.
fn lower_quantile(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    const P_LOW: f64 = 0.02425;

    let z = if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    };

    let density = std_normal_pdf(z);
    if density > 0.0 {
        z - (std_normal_cdf(z) - p) / density
    } else {
        z
    }
}

/// One erfc evaluation shared between `Φ(z)`, `1 - Φ(z)` and `ln Φ(z)`.
///
/// Hot loops that need several of these at the same abscissa use this to
/// avoid paying for the special function twice.
#[derive(Debug, Clone, Copy)]
pub(crate) struct NormalTail {
    z: f64,
    /// `min(Φ(z), 1 - Φ(z))`.
    tail: f64,
}

impl NormalTail {
    #[inline]
    pub(crate) fn new(z: f64) -> Self {
        let tail = 0.5 * libm::erfc(z.abs() * FRAC_1_SQRT_2);
        Self { z, tail }
    }

    #[inline]
    pub(crate) fn cdf(&self) -> f64 {
        if self.z < 0.0 {
            self.tail
        } else {
            1.0 - self.tail
        }
    }

    #[inline]
    pub(crate) fn sf(&self) -> f64 {
        if self.z < 0.0 {
            1.0 - self.tail
        } else {
            self.tail
        }
    }

    #[inline]
    pub(crate) fn log_cdf(&self) -> f64 {
        if self.z < LOG_CDF_SERIES_CUTOFF {
            if self.z == f64::NEG_INFINITY {
                f64::NEG_INFINITY
            } else {
                log_cdf_tail_series(self.z)
            }
        } else if self.z < 0.0 {
            self.tail.ln()
        } else {
            (-self.tail).ln_1p()
        }
    }

    /// `P[a < Z ≤ b]` for `a ≤ b`, differencing whichever tail is smaller.
    #[inline]
    pub(crate) fn mass_between(a: &Self, b: &Self) -> f64 {
        if a.z >= 0.0 {
            (a.tail - b.tail).max(0.0)
        } else if b.z <= 0.0 {
            (b.tail - a.tail).max(0.0)
        } else {
            (1.0 - a.tail - b.tail).max(0.0)
        }
    }
}
