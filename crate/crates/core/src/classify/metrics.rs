use alloc::vec::Vec;

use super::ClassifyError;
use crate::hsic::distinct_sorted;

/// Classification metrics.
///
/// `classes` is listed in descending label order, so for two classes the
/// first is the positive class and `confusion` reads
/// `[[TP, FN], [FP, TN]]` (rows: truth, columns: prediction).
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EvalReport {
    pub classes: Vec<i64>,
    pub n: usize,
    pub accuracy: f64,
    /// Absent unless binary with at least one positive.
    pub tpr: Option<f64>,
    /// Absent unless binary with at least one negative.
    pub tnr: Option<f64>,
    pub confusion: Vec<Vec<u64>>,
    /// `(fpr, tpr)` points from `(0, 0)` to `(1, 1)`.
    pub roc: Option<Vec<(f64, f64)>>,
    pub auc: Option<f64>,
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

/// Evaluates with classes taken from the union of `y_true` and `y_pred`.
pub fn evaluate(y_true: &[i64], y_pred: &[i64], scores: Option<&[f64]>) -> Result<EvalReport, ClassifyError> {
    let mut all = y_true.to_vec();
    all.extend_from_slice(y_pred);
    evaluate_with_classes(&distinct_sorted(&all), y_true, y_pred, scores)
}

/// Evaluates against a fixed class list (any order). Labels outside
/// `classes` count toward `n` and as errors but not toward the confusion
/// matrix.
pub fn evaluate_with_classes(
    classes: &[i64],
    y_true: &[i64],
    y_pred: &[i64],
    scores: Option<&[f64]>,
) -> Result<EvalReport, ClassifyError> {
    if y_true.len() != y_pred.len() {
        return Err(ClassifyError::LengthMismatch { left: y_true.len(), right: y_pred.len() });
    }
    if let Some(s) = scores {
        if s.len() != y_true.len() {
            return Err(ClassifyError::LengthMismatch { left: y_true.len(), right: s.len() });
        }
    }
    let mut classes = distinct_sorted(classes);
    classes.reverse();
    let k = classes.len();
    let index = |v: i64| classes.iter().position(|&c| c == v);
    let mut confusion = alloc::vec![alloc::vec![0u64; k]; k];
    let mut correct = 0u64;
    for (&t, &p) in y_true.iter().zip(y_pred) {
        if t == p {
            correct += 1;
        }
        if let (Some(i), Some(j)) = (index(t), index(p)) {
            confusion[i][j] += 1;
        }
    }
    let n = y_true.len();
    let accuracy = if n == 0 { 0.0 } else { correct as f64 / n as f64 };
    let (tpr, tnr, roc) = if k == 2 {
        let [tp, fn_] = [confusion[0][0], confusion[0][1]];
        let [fp, tn] = [confusion[1][0], confusion[1][1]];
        let roc = scores.and_then(|s| {
            let positive: Vec<bool> = y_true.iter().map(|&t| t == classes[0]).collect();
            roc_curve(s, &positive)
        });
        (ratio(tp, tp + fn_), ratio(tn, tn + fp), roc)
    } else {
        (None, None, None)
    };
    let auc = roc.as_ref().map(|r| trapezoid(r));
    Ok(EvalReport { classes, n, accuracy, tpr, tnr, confusion, roc, auc })
}

/// ROC points from sweeping every distinct score as a threshold, highest
/// first. `None` when either class is absent.
pub fn roc_curve(scores: &[f64], positive: &[bool]) -> Option<Vec<(f64, f64)>> {
    let p = positive.iter().filter(|&&v| v).count();
    let neg = positive.len() - p;
    if p == 0 || neg == 0 {
        return None;
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&i, &j| scores[j].total_cmp(&scores[i]));
    let mut points = alloc::vec![(0.0, 0.0)];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < order.len() {
        let s = scores[order[i]];
        while i < order.len() && scores[order[i]] == s {
            if positive[order[i]] {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        points.push((fp as f64 / neg as f64, tp as f64 / p as f64));
    }
    Some(points)
}

fn trapezoid(points: &[(f64, f64)]) -> f64 {
    points.windows(2).map(|w| (w[1].0 - w[0].0) * (w[1].1 + w[0].1) * 0.5).sum()
}

/// Arithmetic means of report fields over several runs. An optional field
/// is averaged only when every run has it.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MeanMetrics {
    pub runs: usize,
    pub accuracy: f64,
    pub tpr: Option<f64>,
    pub tnr: Option<f64>,
    pub auc: Option<f64>,
}

pub fn mean_metrics(reports: &[EvalReport]) -> MeanMetrics {
    let m = reports.len() as f64;
    let mean_opt = |f: fn(&EvalReport) -> Option<f64>| -> Option<f64> {
        let vals: Option<Vec<f64>> = reports.iter().map(f).collect();
        vals.filter(|v| !v.is_empty()).map(|v| v.iter().sum::<f64>() / m)
    };
    MeanMetrics {
        runs: reports.len(),
        accuracy: if reports.is_empty() { 0.0 } else { reports.iter().map(|r| r.accuracy).sum::<f64>() / m },
        tpr: mean_opt(|r| r.tpr),
        tnr: mean_opt(|r| r.tnr),
        auc: mean_opt(|r| r.auc),
    }
}
