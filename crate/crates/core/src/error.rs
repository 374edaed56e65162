use std::time::Duration;

use thiserror::Error;

use crate::gauss::DomainError;
use crate::types::{BeliefError, ConfigError, Method};

/// Failure of an estimator or objective.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum PomError {
    #[error(transparent)]
    Belief(#[from] BeliefError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error("{method} did not converge within {iterations} iterations")]
    MaxIterationsExceeded { method: Method, iterations: usize },
    #[error("integration grid needs {points} points, limit is {limit}")]
    GridTooLarge { points: f64, limit: usize },
    #[error("improvement ratio degenerates at arm {0}")]
    DegenerateRatio(usize),
    #[error("covariance is not positive semidefinite (eigenvalue {eigenvalue})")]
    NotPsd { eigenvalue: f64 },
    #[error("{required} Monte Carlo samples exceed the cap of {cap}")]
    SampleBudgetOverflow { required: f64, cap: u64 },
    #[error("sampling stopped after {elapsed:?}, budget exhausted")]
    Timeout { elapsed: Duration },
    #[error("not a probability vector: {0}")]
    SimplexViolation(String),
}

impl PomError {
    /// Short machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            PomError::Belief(_) => "InvalidBelief",
            PomError::Config(_) => "InvalidConfig",
            PomError::Domain(_) => "DomainError",
            PomError::MaxIterationsExceeded { .. } => "MaxIterationsExceeded",
            PomError::GridTooLarge { .. } => "GridTooLarge",
            PomError::DegenerateRatio(_) => "DegenerateRatio",
            PomError::NotPsd { .. } => "NotPSD",
            PomError::SampleBudgetOverflow { .. } => "SampleBudgetOverflow",
            PomError::Timeout { .. } => "Timeout",
            PomError::SimplexViolation(_) => "SimplexViolation",
        }
    }
}
