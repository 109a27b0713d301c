//! Evaluation metrics: balanced accuracy and Spearman's rank correlation.
//!
//! Anomalous samples are the positive class throughout.

use crate::data::Label;
use crate::error::{Error, Result};

/// Confusion counts with anomalous as the positive class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ConfusionCounts {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

impl ConfusionCounts {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }

    /// Tally counts from true labels and predicted-anomalous flags.
    pub fn from_predictions(labels: &[Label], predicted_anomalous: &[bool]) -> Result<Self> {
        if labels.len() != predicted_anomalous.len() {
            return Err(Error::shape(format!(
                "labels ({}) and predictions ({}) differ in length",
                labels.len(),
                predicted_anomalous.len()
            )));
        }
        let mut counts = ConfusionCounts::default();
        for (label, &pred) in labels.iter().zip(predicted_anomalous) {
            match (label, pred) {
                (Label::Anomalous, true) => counts.tp += 1,
                (Label::Anomalous, false) => counts.fn_ += 1,
                (Label::Normal, true) => counts.fp += 1,
                (Label::Normal, false) => counts.tn += 1,
                (Label::Unlabeled, _) => {
                    return Err(Error::data(
                        "unlabeled samples cannot enter a confusion matrix",
                    ))
                }
            }
        }
        Ok(counts)
    }
}

/// Mean of the per-class recalls.
///
/// Errors when either class is absent; recall is undefined then.
pub fn balanced_accuracy(counts: &ConfusionCounts) -> Result<f64> {
    let negatives = counts.tn + counts.fp;
    let positives = counts.tp + counts.fn_;
    if negatives == 0 || positives == 0 {
        return Err(Error::Undefined(format!(
            "balanced accuracy needs both classes (negatives={negatives}, positives={positives})"
        )));
    }
    let recall_neg = counts.tn as f64 / negatives as f64;
    let recall_pos = counts.tp as f64 / positives as f64;
    Ok(0.5 * (recall_neg + recall_pos))
}

/// Confusion counts of the predictor that marks every sample anomalous.
pub fn trivial_baseline(labels: &[Label]) -> ConfusionCounts {
    let mut counts = ConfusionCounts::default();
    for label in labels {
        match label {
            Label::Anomalous => counts.tp += 1,
            Label::Normal => counts.fp += 1,
            Label::Unlabeled => {}
        }
    }
    counts
}

/// Fractional (average) ranks, 1-based; ties share the mean of their positions.
pub fn fractional_ranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).expect("finite values"));

    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        // positions i..=j (0-based) share the average of ranks i+1..=j+1
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman's rank correlation: Pearson correlation of the two rank vectors,
/// with average ranks for ties.
///
/// Errors when fewer than two samples or when either rank vector has zero
/// variance (all values tied).
pub fn spearman_rho(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::shape(format!(
            "sequences differ in length ({} vs {})",
            a.len(),
            b.len()
        )));
    }
    if a.len() < 2 {
        return Err(Error::Undefined(
            "spearman correlation needs at least 2 samples".into(),
        ));
    }
    if a.iter().chain(b.iter()).any(|v| !v.is_finite()) {
        return Err(Error::Numerical("non-finite value in spearman input".into()));
    }
    let ra = fractional_ranks(a);
    let rb = fractional_ranks(b);
    pearson(&ra, &rb)
}

fn pearson(a: &[f64], b: &[f64]) -> Result<f64> {
    let n = a.len() as f64;
    let mean_a = a.iter().sum::<f64>() / n;
    let mean_b = b.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var_a = 0.0;
    let mut var_b = 0.0;
    for (&x, &y) in a.iter().zip(b) {
        let da = x - mean_a;
        let db = y - mean_b;
        cov += da * db;
        var_a += da * da;
        var_b += db * db;
    }
    if var_a == 0.0 || var_b == 0.0 {
        return Err(Error::Undefined(
            "zero rank variance: correlation undefined".into(),
        ));
    }
    Ok(cov / (var_a * var_b).sqrt())
}

/// Mean and population standard deviation of a set of values.
pub fn aggregate(values: &[f64]) -> Result<(f64, f64)> {
    if values.is_empty() {
        return Err(Error::Undefined("aggregate of an empty set".into()));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    Ok((mean, var.sqrt()))
}
