//! Random independent beliefs.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use super::BenchError;
use crate::rng::SeededRng;
use crate::types::IndependentGaussianBelief;

/// Distribution of means and standard deviations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// `μ ~ U[0, 5]`, `σ ~ U[0.5, 10]`.
    Main,
    /// `μ ~ U[0, 5]`, `σ ~ U[0.5, 2]`.
    SmallStd,
    /// `μ ~ U[0, 5]`, `σ = 0.5`.
    FixedStd,
    /// `μ ~ U[0, 0.1]`, `σ = 0.5`.
    SmallMean,
}

impl Family {
    pub const ALL: [Family; 4] = [Family::Main, Family::SmallStd, Family::FixedStd, Family::SmallMean];

    pub fn name(self) -> &'static str {
        match self {
            Family::Main => "main",
            Family::SmallStd => "small-std",
            Family::FixedStd => "fixed-std",
            Family::SmallMean => "small-mean",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Family::ALL.into_iter().find(|f| f.name() == s).ok_or_else(|| BenchError::UnknownFamily(s.to_string()))
    }
}

/// Draw a belief of `size` arms: all means first, then all spreads.
pub fn synthetic_belief(size: usize, rng: &mut SeededRng, family: &str) -> Result<IndependentGaussianBelief, BenchError> {
    let family: Family = family.parse()?;
    let mu_hi = if family == Family::SmallMean { 0.1 } else { 5.0 };
    let mu: Vec<f64> = (0..size).map(|_| rng.random_range(0.0..mu_hi)).collect();
    let sigma: Vec<f64> = match family {
        Family::Main => (0..size).map(|_| rng.random_range(0.5..10.0)).collect(),
        Family::SmallStd => (0..size).map(|_| rng.random_range(0.5..2.0)).collect(),
        Family::FixedStd | Family::SmallMean => vec![0.5; size],
    };
    Ok(IndependentGaussianBelief::new(mu, sigma)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn families() {
        let b = synthetic_belief(1000, &mut SeededRng::new(1), "main").unwrap();
        assert!(b.sigma().iter().all(|s| (0.5..=10.0).contains(s)));
        assert!(b.mu().iter().all(|m| (0.0..=5.0).contains(m)));
        let again = synthetic_belief(1000, &mut SeededRng::new(1), "main").unwrap();
        assert_eq!(b, again);
        let f = synthetic_belief(50, &mut SeededRng::new(2), "fixed-std").unwrap();
        assert!(f.sigma().iter().all(|s| *s == 0.5));
        let m = synthetic_belief(50, &mut SeededRng::new(2), "small-mean").unwrap();
        assert!(m.mu().iter().all(|v| (0.0..=0.1).contains(v)));
        let s = synthetic_belief(50, &mut SeededRng::new(2), "small-std").unwrap();
        assert!(s.sigma().iter().all(|v| (0.5..=2.0).contains(v)));
        assert_eq!(
            synthetic_belief(5, &mut SeededRng::new(0), "wide"),
            Err(BenchError::UnknownFamily("wide".into()))
        );
    }
}
