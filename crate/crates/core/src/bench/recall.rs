//! Expected recall of top-k selections.

use rand::Rng;
use rand_distr::StandardNormal;

use super::BenchError;
use crate::estimators::estimate;
use crate::metrics::{expected_recall, top_k, RecallCurve};
use crate::rng::SeededRng;
use crate::types::{ConvergenceConfig, IndependentGaussianBelief, Method};

/// Draws allowed per selected arm before the Thompson selection is
/// completed from the means.
pub const TS_DRAWS_PER_ARM: usize = 50;

/// How a size-k selection is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecallMethod {
    /// Top-k of a PoM estimate.
    Pom(Method),
    /// Top-k of the reference PoM.
    GroundTruth,
    /// Arms in order of first appearance as the argmax of Thompson draws.
    Ts,
    /// Top-k of the means.
    Means,
}

impl RecallMethod {
    pub fn tag(&self) -> String {
        match self {
            RecallMethod::Pom(m) => m.tag().to_string(),
            RecallMethod::GroundTruth => "ground-truth".into(),
            RecallMethod::Ts => "ts".into(),
            RecallMethod::Means => "means".into(),
        }
    }
}

/// Curves for every method, plus the `k` at which the Thompson selection
/// ran out of draws and was filled from the means.
#[derive(Debug, Clone, PartialEq)]
pub struct RecallReport {
    pub curves: Vec<RecallCurve>,
    pub ts_filled: Vec<usize>,
}

impl RecallReport {
    pub fn auc(&self, method: &RecallMethod) -> Option<f64> {
        let tag = method.tag();
        self.curves.iter().find(|c| c.estimator == tag).map(|c| c.auc())
    }
}

/// Recall at every `k = 1..=|X|` for each method.
pub fn recall_curve_suite(
    belief: &IndependentGaussianBelief,
    ground_truth: &[f64],
    methods: &[RecallMethod],
    cfg: &ConvergenceConfig,
    rng: &mut SeededRng,
) -> Result<RecallReport, BenchError> {
    let n = belief.len();
    let mut curves = Vec::with_capacity(methods.len());
    let mut ts_filled = Vec::new();
    for method in methods {
        let curve = match method {
            RecallMethod::Pom(m) => {
                let est = estimate(*m, belief, cfg, Some(rng))?;
                RecallCurve::from_ranking(&method.tag(), &top_k(&est.probs, n)?, ground_truth)?
            }
            RecallMethod::GroundTruth => RecallCurve::from_ranking(&method.tag(), &top_k(ground_truth, n)?, ground_truth)?,
            RecallMethod::Means => RecallCurve::from_ranking(&method.tag(), &top_k(belief.mu(), n)?, ground_truth)?,
            RecallMethod::Ts => {
                let (curve, filled) = thompson_curve(belief, ground_truth, rng)?;
                ts_filled = filled;
                curve
            }
        };
        curves.push(curve);
    }
    Ok(RecallReport { curves, ts_filled })
}

/// One stream of Thompson draws serves every `k`: the selection of size
/// `k` is the first `k` distinct argmaxes among the first `50·k` draws,
/// completed by the highest means if fewer arms appeared.
fn thompson_curve(
    belief: &IndependentGaussianBelief,
    ground_truth: &[f64],
    rng: &mut SeededRng,
) -> Result<(RecallCurve, Vec<usize>), BenchError> {
    let n = belief.len();
    let (mu, sigma) = (belief.mu(), belief.sigma());
    let cap = TS_DRAWS_PER_ARM * n;
    // first_seen[j] = number of draws made when the (j+1)-th distinct arm appeared
    let mut order = Vec::with_capacity(n);
    let mut first_seen = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    let mut draws = 0;
    while order.len() < n && draws < cap {
        draws += 1;
        let mut best = 0;
        let mut best_val = f64::NEG_INFINITY;
        for i in 0..n {
            let v = mu[i] + sigma[i] * rng.sample::<f64, _>(StandardNormal);
            if v > best_val {
                best = i;
                best_val = v;
            }
        }
        if !seen[best] {
            seen[best] = true;
            order.push(best);
            first_seen.push(draws);
        }
    }
    let by_mean = top_k(mu, n)?;
    let mut recalls = Vec::with_capacity(n);
    let mut filled = Vec::new();
    for k in 1..=n {
        let budget = TS_DRAWS_PER_ARM * k;
        let found = first_seen.iter().take(k).take_while(|&&d| d <= budget).count();
        let mut sel: Vec<usize> = order[..found].to_vec();
        if found < k {
            filled.push(k);
            let mut chosen = vec![false; n];
            for &i in &sel {
                chosen[i] = true;
            }
            sel.extend(by_mean.iter().copied().filter(|&i| !chosen[i]).take(k - found));
        }
        recalls.push(expected_recall(&sel, ground_truth)?);
    }
    let curve = RecallCurve { estimator: RecallMethod::Ts.tag(), k_values: (1..=n).collect(), recalls };
    Ok((curve, filled))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::synthetic_belief;
    use crate::estimators::estimate_independence;

    #[test]
    fn full_selection_and_dominance() {
        let mut rng = SeededRng::new(5);
        let b = synthetic_belief(60, &mut rng, "main").unwrap();
        let cfg = ConvergenceConfig::with_alpha(10.0);
        let gt = estimate_independence(&b, &cfg).unwrap().probs;
        let methods = [
            RecallMethod::GroundTruth,
            RecallMethod::Pom(Method::Flite),
            RecallMethod::Pom(Method::Fvapor),
            RecallMethod::Ts,
            RecallMethod::Means,
        ];
        let rep = recall_curve_suite(&b, &gt, &methods, &cfg, &mut rng).unwrap();
        let truth = &rep.curves[0];
        for c in &rep.curves {
            assert!((c.recalls[59] - 1.0).abs() < 1e-9, "{}", c.estimator);
            for (r, t) in c.recalls.iter().zip(&truth.recalls) {
                assert!(*r <= t + 1e-12);
            }
            assert!(c.recalls.windows(2).all(|w| w[1] >= w[0] - 1e-15) || c.estimator == "ts");
        }
        assert!(rep.auc(&RecallMethod::Means).is_some());
    }

    #[test]
    fn ts_is_reproducible() {
        let b = synthetic_belief(30, &mut SeededRng::new(1), "fixed-std").unwrap();
        let gt = vec![1.0 / 30.0; 30];
        let cfg = ConvergenceConfig::with_alpha(1.0);
        let a = recall_curve_suite(&b, &gt, &[RecallMethod::Ts], &cfg, &mut SeededRng::new(9)).unwrap();
        let c = recall_curve_suite(&b, &gt, &[RecallMethod::Ts], &cfg, &mut SeededRng::new(9)).unwrap();
        assert_eq!(a, c);
    }
}
