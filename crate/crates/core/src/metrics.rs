//! Distances, entropies and recall for probability-of-maximality vectors.

use std::collections::HashSet;

use thiserror::Error;

/// Tolerance on `|Σp - 1|` for inputs treated as distributions.
pub const NORMALIZATION_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricError {
    #[error("vectors have lengths {0} and {1}")]
    LengthMismatch(usize, usize),
    #[error("entries sum to {0}, not 1")]
    NotNormalized(f64),
    #[error("reference entropy at index {0} is zero")]
    ZeroTruth(usize),
    #[error("index {0} selected twice")]
    DuplicateIndex(usize),
    #[error("index {index} out of range for {len} arms")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("k = {k} outside 0..={len}")]
    KOutOfRange { k: usize, len: usize },
}

fn check_normalized(p: &[f64]) -> Result<(), MetricError> {
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > NORMALIZATION_TOL || p.iter().any(|v| *v < 0.0) {
        return Err(MetricError::NotNormalized(total));
    }
    Ok(())
}

/// Total variation `½ Σ |p_x - q_x|`.
pub fn tv_distance(p: &[f64], q: &[f64]) -> Result<f64, MetricError> {
    if p.len() != q.len() {
        return Err(MetricError::LengthMismatch(p.len(), q.len()));
    }
    check_normalized(p)?;
    check_normalized(q)?;
    Ok(0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>())
}

/// Shannon entropy in nats, with `0 ln 0 = 0`.
pub fn shannon_entropy(p: &[f64]) -> Result<f64, MetricError> {
    check_normalized(p)?;
    Ok(p.iter().filter(|v| **v > 0.0).map(|v| -v * v.ln()).sum())
}

/// Root mean squared relative error of entropy estimates.
pub fn entropy_rmsre(estimates: &[f64], truths: &[f64]) -> Result<f64, MetricError> {
    if estimates.len() != truths.len() {
        return Err(MetricError::LengthMismatch(estimates.len(), truths.len()));
    }
    if let Some(i) = truths.iter().position(|t| *t == 0.0) {
        return Err(MetricError::ZeroTruth(i));
    }
    if truths.is_empty() {
        return Ok(0.0);
    }
    let mse = estimates.iter().zip(truths).map(|(e, t)| ((e - t) / t).powi(2)).sum::<f64>() / truths.len() as f64;
    Ok(mse.sqrt())
}

/// Probability mass of the selected arms under `ground_truth`.
pub fn expected_recall(selection: &[usize], ground_truth: &[f64]) -> Result<f64, MetricError> {
    let mut seen = HashSet::with_capacity(selection.len());
    let mut total = 0.0;
    for &i in selection {
        if i >= ground_truth.len() {
            return Err(MetricError::IndexOutOfRange { index: i, len: ground_truth.len() });
        }
        if !seen.insert(i) {
            return Err(MetricError::DuplicateIndex(i));
        }
        total += ground_truth[i];
    }
    Ok(total)
}

/// Indices of the `k` largest entries, largest first; ties go to the lower index.
pub fn top_k(p: &[f64], k: usize) -> Result<Vec<usize>, MetricError> {
    if k > p.len() {
        return Err(MetricError::KOutOfRange { k, len: p.len() });
    }
    let mut idx: Vec<usize> = (0..p.len()).collect();
    idx.sort_by(|&a, &b| p[b].total_cmp(&p[a]).then(a.cmp(&b)));
    idx.truncate(k);
    Ok(idx)
}

/// Index of the largest entry, lowest index on ties.
pub fn argmax(p: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in p.iter().enumerate() {
        if *v > p[best] {
            best = i;
        }
    }
    best
}

/// Recall as a function of the selection size.
#[derive(Debug, Clone, PartialEq)]
pub struct RecallCurve {
    pub estimator: String,
    pub k_values: Vec<usize>,
    pub recalls: Vec<f64>,
}

impl RecallCurve {
    /// Recall of nested selections `order[..k]` for `k = 1..=order.len()`.
    pub fn from_ranking(estimator: &str, order: &[usize], ground_truth: &[f64]) -> Result<Self, MetricError> {
        let mut recalls = Vec::with_capacity(order.len());
        for k in 1..=order.len() {
            recalls.push(expected_recall(&order[..k], ground_truth)?);
        }
        Ok(Self { estimator: estimator.to_string(), k_values: (1..=order.len()).collect(), recalls })
    }

    /// Mean recall over the recorded `k`.
    pub fn auc(&self) -> f64 {
        if self.recalls.is_empty() {
            return 0.0;
        }
        self.recalls.iter().sum::<f64>() / self.recalls.len() as f64
    }
}
