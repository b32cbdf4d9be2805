//! Conformal prediction sets for softmax classifiers.
//!
//! Scores are `s = 1 − p_y`, the probability mass the model puts *off* the
//! true class. Given calibration scores `s_1 … s_N` and a miscoverage level
//! `δ`, the threshold `q̂` is the `⌈(1−δ)(N+1)⌉`-th smallest score, and the
//! prediction set for a new point is every class with `p_y ≥ 1 − q̂`.
//!
//! ```
//! use adaptact::conformal::{conformal_quantile, prediction_set};
//!
//! let scores: Vec<f64> = (1..=19).map(|i| 0.05 * i as f64).collect();
//! let q_hat = conformal_quantile(&scores, 0.1).unwrap();
//! assert!((q_hat - 0.90).abs() < 1e-12);
//!
//! let set = prediction_set(&[0.7, 0.2, 0.1], 0.5);
//! assert_eq!(set.members(), &[0]);
//! ```

use serde::{Deserialize, Serialize};

use crate::network::Network;
use crate::{Error, Result};

pub const DEFAULT_DELTA: f64 = 0.1;

/// Classes retained for one test point, in ascending order. May be empty.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PredictionSet {
    members: Vec<usize>,
}

impl PredictionSet {
    /// Builds a set from arbitrary indices; sorts and deduplicates them.
    pub fn from_members(mut members: Vec<usize>) -> Self {
        members.sort_unstable();
        members.dedup();
        PredictionSet { members }
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn contains(&self, class: usize) -> bool {
        self.members.binary_search(&class).is_ok()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn is_subset(&self, other: &PredictionSet) -> bool {
        self.members.iter().all(|&c| other.contains(c))
    }
}

/// A fitted threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConformalCalibration {
    pub q_hat: f64,
    pub delta: f64,
    pub n_cal: usize,
}

impl ConformalCalibration {
    pub fn fit(scores: &[f64], delta: f64) -> Result<Self> {
        Ok(ConformalCalibration {
            q_hat: conformal_quantile(scores, delta)?,
            delta,
            n_cal: scores.len(),
        })
    }

    pub fn prediction_set(&self, probs: &[f64]) -> PredictionSet {
        prediction_set(probs, self.q_hat)
    }
}

/// `1 − probs[true_label]`.
pub fn nonconformity_score(probs: &[f64], true_label: usize) -> Result<f64> {
    probs
        .get(true_label)
        .map(|p| 1.0 - p)
        .ok_or(Error::LabelOutOfRange {
            label: true_label,
            num_classes: probs.len(),
        })
}

/// Rank `k = ⌈(1−δ)(N+1)⌉` of the order statistic used as threshold.
pub fn quantile_rank(n: usize, delta: f64) -> usize {
    let raw = (1.0 - delta) * (n as f64 + 1.0);
    // (1−δ)(N+1) is often an exact integer in real arithmetic that lands a
    // few ulps above it in floating point; don't let that bump k by one.
    let k = (raw - 1e-9 * raw.max(1.0)).ceil();
    (k.max(1.0)) as usize
}

/// The `⌈(1−δ)(N+1)⌉`-th smallest score, or `1.0` when that rank exceeds `N`.
pub fn conformal_quantile(scores: &[f64], delta: f64) -> Result<f64> {
    if scores.is_empty() {
        return Err(Error::Empty("calibration scores"));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "delta must lie in (0, 1), got {delta}"
        )));
    }
    if let Some(bad) = scores.iter().find(|s| s.is_nan()) {
        return Err(Error::InvalidArgument(format!("score is {bad}")));
    }
    let n = scores.len();
    let k = quantile_rank(n, delta);
    if k > n {
        return Ok(1.0);
    }
    let mut sorted = scores.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(sorted[k - 1].clamp(0.0, 1.0))
}

/// Every class whose probability is at least `1 − q_hat`.
pub fn prediction_set(probs: &[f64], q_hat: f64) -> PredictionSet {
    let threshold = 1.0 - q_hat;
    PredictionSet {
        members: probs
            .iter()
            .enumerate()
            .filter(|(_, &p)| p >= threshold)
            .map(|(c, _)| c)
            .collect(),
    }
}

/// Fraction of points whose label lies in its set. Empty sets count as misses.
pub fn empirical_coverage(sets: &[PredictionSet], labels: &[usize]) -> Result<f64> {
    if sets.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            expected: sets.len(),
            actual: labels.len(),
            context: "labels vs prediction sets",
        });
    }
    if sets.is_empty() {
        return Err(Error::Empty("prediction sets"));
    }
    let hits = sets
        .iter()
        .zip(labels)
        .filter(|(s, &y)| s.contains(y))
        .count();
    Ok(hits as f64 / sets.len() as f64)
}

/// Mean prediction-set size.
pub fn uncertainty_score(sets: &[PredictionSet]) -> Result<f64> {
    if sets.is_empty() {
        return Err(Error::Empty("prediction sets"));
    }
    let total: usize = sets.iter().map(PredictionSet::len).sum();
    Ok(total as f64 / sets.len() as f64)
}

/// Outcome of calibrating on one set and evaluating on another.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConformalReport {
    pub coverage: f64,
    pub avg_set_size: f64,
    pub q_hat: f64,
    pub sets: Vec<PredictionSet>,
}

/// Scores `cal`, thresholds at level `delta`, and builds sets for `test`.
///
/// Feature buffers are row-major with the network's input dimension.
pub fn calibrate_and_evaluate(
    net: &Network,
    cal_features: &[f64],
    cal_labels: &[usize],
    test_features: &[f64],
    test_labels: &[usize],
    delta: f64,
) -> Result<ConformalReport> {
    let d = net.spec.input_dim;
    if cal_labels.is_empty() {
        return Err(Error::Empty("calibration set"));
    }
    if test_labels.is_empty() {
        return Err(Error::Empty("test set"));
    }
    check_rows(cal_features, cal_labels.len(), d, "calibration features")?;
    check_rows(test_features, test_labels.len(), d, "test features")?;

    let scores = cal_features
        .chunks_exact(d)
        .zip(cal_labels)
        .map(|(x, &y)| nonconformity_score(&net.forward(x)?, y))
        .collect::<Result<Vec<_>>>()?;
    let q_hat = conformal_quantile(&scores, delta)?;

    let sets = test_features
        .chunks_exact(d)
        .map(|x| Ok(prediction_set(&net.forward(x)?, q_hat)))
        .collect::<Result<Vec<_>>>()?;

    Ok(ConformalReport {
        coverage: empirical_coverage(&sets, test_labels)?,
        avg_set_size: uncertainty_score(&sets)?,
        q_hat,
        sets,
    })
}

fn check_rows(features: &[f64], rows: usize, d: usize, context: &'static str) -> Result<()> {
    if features.len() != rows * d {
        return Err(Error::DimensionMismatch {
            expected: rows * d,
            actual: features.len(),
            context,
        });
    }
    Ok(())
}
