//! Scoring primitives: F1 with confusion matrices for presence
//! classification, MAE and R-squared for temperature regression, and a
//! percentage-point error for phase fractions.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum EvalError {
    #[error("length mismatch: {a} vs {b}")]
    LengthMismatch { a: usize, b: usize },
    #[error("no samples to score")]
    Empty,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationScores {
    pub f1: f64,
    pub precision: f64,
    pub recall: f64,
    pub accuracy: f64,
    /// Row-normalized confusion matrix, rows = truth (absent, present),
    /// columns = prediction. A row with no samples stays zero.
    pub confusion: [[f64; 2]; 2],
    /// Raw counts behind `confusion`, same layout.
    pub counts: [[usize; 2]; 2],
    pub n: usize,
}

/// Binary presence scores. Precision and recall fall back to 0 when their
/// denominator is empty, and F1 is 0 when precision + recall is 0.
pub fn score_classification(
    truth: &[bool],
    pred: &[bool],
) -> Result<ClassificationScores, EvalError> {
    if truth.len() != pred.len() {
        return Err(EvalError::LengthMismatch { a: truth.len(), b: pred.len() });
    }
    if truth.is_empty() {
        return Err(EvalError::Empty);
    }
    let mut counts = [[0usize; 2]; 2];
    for (&t, &p) in truth.iter().zip(pred) {
        counts[t as usize][p as usize] += 1;
    }
    let (tn, fp, fn_, tp) = (counts[0][0], counts[0][1], counts[1][0], counts[1][1]);
    let precision = if tp + fp > 0 { tp as f64 / (tp + fp) as f64 } else { 0.0 };
    let recall = if tp + fn_ > 0 { tp as f64 / (tp + fn_) as f64 } else { 0.0 };
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    let accuracy = (tp + tn) as f64 / truth.len() as f64;
    let mut confusion = [[0.0; 2]; 2];
    for (i, row) in counts.iter().enumerate() {
        let total: usize = row.iter().sum();
        if total > 0 {
            for (j, &c) in row.iter().enumerate() {
                confusion[i][j] = c as f64 / total as f64;
            }
        }
    }
    Ok(ClassificationScores { f1, precision, recall, accuracy, confusion, counts, n: truth.len() })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionScores {
    pub mae: f64,
    pub rmse: f64,
    /// None when the truth has zero variance (R-squared undefined).
    pub r2: Option<f64>,
    pub n: usize,
}

pub fn score_regression(truth: &[f64], pred: &[f64]) -> Result<RegressionScores, EvalError> {
    if truth.len() != pred.len() {
        return Err(EvalError::LengthMismatch { a: truth.len(), b: pred.len() });
    }
    if truth.is_empty() {
        return Err(EvalError::Empty);
    }
    let n = truth.len() as f64;
    let mae = truth.iter().zip(pred).map(|(t, p)| (t - p).abs()).sum::<f64>() / n;
    let sse: f64 = truth.iter().zip(pred).map(|(t, p)| (t - p) * (t - p)).sum();
    let rmse = (sse / n).sqrt();
    let mean = truth.iter().sum::<f64>() / n;
    let sst: f64 = truth.iter().map(|t| (t - mean) * (t - mean)).sum();
    let r2 = if sst > 0.0 { Some(1.0 - sse / sst) } else { None };
    Ok(RegressionScores { mae, rmse, r2, n: truth.len() })
}

/// Mean absolute fraction error in percentage points.
///
/// True fractions are frequently exactly zero, where a ratio-based
/// percentage error is undefined, so the error is measured as
/// |pred - truth| * 100 averaged over rows, per phase and overall.
pub fn fraction_error_points(
    truth: &[[f64; 4]],
    pred: &[[f64; 4]],
) -> Result<([f64; 4], f64), EvalError> {
    if truth.len() != pred.len() {
        return Err(EvalError::LengthMismatch { a: truth.len(), b: pred.len() });
    }
    if truth.is_empty() {
        return Err(EvalError::Empty);
    }
    let mut per_phase = [0.0; 4];
    for (t, p) in truth.iter().zip(pred) {
        for k in 0..4 {
            per_phase[k] += (t[k] - p[k]).abs() * 100.0;
        }
    }
    for v in per_phase.iter_mut() {
        *v /= truth.len() as f64;
    }
    let mean = per_phase.iter().sum::<f64>() / 4.0;
    Ok((per_phase, mean))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classification_counts_and_rates() {
        // truth:  1 1 1 0 0 0 1 0
        // pred:   1 0 1 0 1 0 1 1
        let truth = [true, true, true, false, false, false, true, false];
        let pred = [true, false, true, false, true, false, true, true];
        let s = score_classification(&truth, &pred).unwrap();
        assert_eq!(s.counts, [[2, 2], [1, 3]]);
        assert!((s.precision - 3.0 / 5.0).abs() < 1e-12);
        assert!((s.recall - 3.0 / 4.0).abs() < 1e-12);
        let want_f1 = 2.0 * 0.6 * 0.75 / (0.6 + 0.75);
        assert!((s.f1 - want_f1).abs() < 1e-12);
        assert!((s.accuracy - 5.0 / 8.0).abs() < 1e-12);
        assert!((s.confusion[0][0] - 0.5).abs() < 1e-12);
        assert!((s.confusion[1][1] - 0.75).abs() < 1e-12);
        for row in s.confusion {
            assert!((row[0] + row[1] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn degenerate_f1_is_zero_not_nan() {
        // Nothing predicted positive and nothing truly positive.
        let s = score_classification(&[false, false], &[false, false]).unwrap();
        assert_eq!(s.f1, 0.0);
        assert_eq!(s.precision, 0.0);
        assert_eq!(s.recall, 0.0);
        assert_eq!(s.accuracy, 1.0);
        assert_eq!(s.confusion[1], [0.0, 0.0]);
    }

    #[test]
    fn perfect_prediction_scores_one() {
        let truth = [true, false, true, true];
        let s = score_classification(&truth, &truth).unwrap();
        assert_eq!(s.f1, 1.0);
        assert_eq!(s.accuracy, 1.0);
    }

    #[test]
    fn regression_mae_and_r2() {
        let truth = [1.0, 2.0, 3.0, 4.0];
        let pred = [1.5, 2.0, 2.5, 4.0];
        let s = score_regression(&truth, &pred).unwrap();
        assert!((s.mae - 0.25).abs() < 1e-12);
        // SSE = 0.5, SST = 5.0.
        assert!((s.r2.unwrap() - 0.9).abs() < 1e-12);
        assert!((s.rmse - (0.5f64 / 4.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn zero_variance_truth_gives_no_r2() {
        let s = score_regression(&[5.0, 5.0, 5.0], &[4.0, 5.0, 6.0]).unwrap();
        assert_eq!(s.r2, None);
        assert!((s.mae - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn fraction_error_is_percentage_points() {
        let truth = [[1.0, 0.0, 0.0, 0.0], [0.5, 0.5, 0.0, 0.0]];
        let pred = [[0.9, 0.1, 0.0, 0.0], [0.5, 0.3, 0.2, 0.0]];
        let (per_phase, mean) = fraction_error_points(&truth, &pred).unwrap();
        assert!((per_phase[0] - 5.0).abs() < 1e-12);
        assert!((per_phase[1] - 15.0).abs() < 1e-12);
        assert!((per_phase[2] - 10.0).abs() < 1e-12);
        assert_eq!(per_phase[3], 0.0);
        assert!((mean - 7.5).abs() < 1e-12);
    }

    #[test]
    fn mismatched_lengths_error() {
        assert!(matches!(
            score_classification(&[true], &[true, false]),
            Err(EvalError::LengthMismatch { a: 1, b: 2 })
        ));
        assert!(matches!(score_regression(&[], &[]), Err(EvalError::Empty)));
    }
}
