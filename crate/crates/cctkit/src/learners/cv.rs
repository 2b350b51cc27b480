//! Grid search with diagram-grouped k-fold cross-validation.
//!
//! Validation error is 1 - F1 for classification and MAE for regression;
//! the grid point with the lowest mean across folds wins (first on ties)
//! and is refit on all rows.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{fit, FittedModel, LearnError, LearnerSpec, Task};
use crate::data::assign_diagram_folds;
use crate::eval::metrics::{score_classification, score_regression};
use crate::matrix::Matrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvCell {
    pub spec: LearnerSpec,
    pub label: String,
    pub fold_errors: Vec<f64>,
    pub mean_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub cells: Vec<CvCell>,
    /// Index into `cells` of the winning grid point.
    pub chosen: usize,
    pub folds: usize,
    /// "1-f1" or "mae".
    pub metric: String,
}

impl CvReport {
    pub fn chosen_spec(&self) -> &LearnerSpec {
        &self.cells[self.chosen].spec
    }
}

fn fold_error(
    spec: &LearnerSpec,
    x: &Matrix,
    y: &[f64],
    w: &[f64],
    fold_of: &[usize],
    fold: usize,
) -> Result<f64, LearnError> {
    let train_rows: Vec<usize> = (0..y.len()).filter(|&r| fold_of[r] != fold).collect();
    let test_rows: Vec<usize> = (0..y.len()).filter(|&r| fold_of[r] == fold).collect();
    let x_train = x.select_rows(&train_rows);
    let y_train: Vec<f64> = train_rows.iter().map(|&r| y[r]).collect();
    let w_train: Vec<f64> = train_rows.iter().map(|&r| w[r]).collect();
    let model = fit(&x_train, &y_train, Some(&w_train), spec)?;

    let x_test = x.select_rows(&test_rows);
    let y_test: Vec<f64> = test_rows.iter().map(|&r| y[r]).collect();
    match spec.task {
        Task::Classify => {
            let pred = model.predict_labels(&x_test)?;
            let truth: Vec<bool> = y_test.iter().map(|&v| v == 1.0).collect();
            let s = score_classification(&truth, &pred)
                .map_err(|_| LearnError::EmptyData { rows: 0 })?;
            Ok(1.0 - s.f1)
        }
        Task::Regress => {
            let pred = model.predict(&x_test)?;
            let s = score_regression(&y_test, &pred)
                .map_err(|_| LearnError::EmptyData { rows: 0 })?;
            Ok(s.mae)
        }
    }
}

/// Scores every grid point across diagram-grouped folds. All specs must
/// share one task. Fold membership is deterministic in `seed`.
pub fn cross_validate(
    grid: &[LearnerSpec],
    x: &Matrix,
    y: &[f64],
    sample_weight: Option<&[f64]>,
    diagram_ids: &[&str],
    folds: usize,
    seed: u64,
) -> Result<CvReport, LearnError> {
    if grid.is_empty() {
        return Err(LearnError::EmptyGrid);
    }
    let task = grid[0].task;
    assert!(grid.iter().all(|s| s.task == task), "mixed tasks in one grid");
    if diagram_ids.len() != y.len() {
        return Err(LearnError::WidthMismatch { expected: y.len(), got: diagram_ids.len() });
    }
    let w = match sample_weight {
        Some(w) => w.to_vec(),
        None => vec![1.0; y.len()],
    };
    let fold_of = assign_diagram_folds(diagram_ids, folds, seed).map_err(|e| match e {
        crate::data::ValidationError::TooFewDiagrams { found, needed } => {
            LearnError::TooFewDiagrams { found, needed }
        }
        _ => LearnError::EmptyData { rows: y.len() },
    })?;

    let tasks: Vec<(usize, usize)> =
        (0..grid.len()).flat_map(|gi| (0..folds).map(move |f| (gi, f))).collect();
    let errors: Vec<((usize, usize), Result<f64, LearnError>)> = tasks
        .par_iter()
        .map(|&(gi, f)| ((gi, f), fold_error(&grid[gi], x, y, &w, &fold_of, f)))
        .collect();

    let mut cells: Vec<CvCell> = grid
        .iter()
        .map(|s| CvCell {
            spec: *s,
            label: s.label(),
            fold_errors: vec![0.0; folds],
            mean_error: 0.0,
        })
        .collect();
    for ((gi, f), err) in errors {
        cells[gi].fold_errors[f] = err?;
    }
    for cell in cells.iter_mut() {
        cell.mean_error = cell.fold_errors.iter().sum::<f64>() / folds as f64;
    }

    let chosen = cells
        .iter()
        .enumerate()
        .min_by(|(_, a), (_, b)| a.mean_error.partial_cmp(&b.mean_error).unwrap())
        .map(|(i, _)| i)
        .unwrap();
    Ok(CvReport {
        cells,
        chosen,
        folds,
        metric: match task {
            Task::Classify => "1-f1".to_string(),
            Task::Regress => "mae".to_string(),
        },
    })
}

/// Cross-validates the grid, then refits the winner on all rows.
pub fn fit_with_cv(
    grid: &[LearnerSpec],
    x: &Matrix,
    y: &[f64],
    sample_weight: Option<&[f64]>,
    diagram_ids: &[&str],
    folds: usize,
    seed: u64,
) -> Result<(FittedModel, CvReport), LearnError> {
    let report = cross_validate(grid, x, y, sample_weight, diagram_ids, folds, seed)?;
    let model = fit(x, y, sample_weight, report.chosen_spec())?;
    Ok((model, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learners::{HyperParams, LearnerFamily};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Linear-ish target over 12 diagrams, 8 points each.
    fn grouped_problem() -> (Matrix, Vec<f64>, Vec<String>) {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut rows = Vec::new();
        let mut y = Vec::new();
        let mut ids = Vec::new();
        for d in 0..12 {
            let shift = rng.random_range(-1.0..1.0);
            for i in 0..8 {
                let t = i as f64 / 7.0;
                rows.push(vec![t, shift]);
                y.push(2.0 * t + shift + rng.random_range(-0.05..0.05));
                ids.push(format!("d{d}"));
            }
        }
        (Matrix::from_rows(&rows), y, ids)
    }

    fn gb(depth: usize, trees: usize) -> LearnerSpec {
        LearnerSpec {
            family: LearnerFamily::GradientBoost,
            task: Task::Regress,
            hyper: HyperParams { max_depth: depth, n_trees: trees, ..Default::default() },
            seed: 0,
        }
    }

    #[test]
    fn picks_the_stronger_grid_point() {
        let (x, y, ids) = grouped_problem();
        let ids: Vec<&str> = ids.iter().map(String::as_str).collect();
        // A 1-tree stump cannot track the slope; 150 depth-3 trees can.
        let grid = vec![gb(1, 1), gb(3, 150)];
        let (model, report) = fit_with_cv(&grid, &x, &y, None, &ids, 3, 0).unwrap();
        assert_eq!(report.chosen, 1);
        assert_eq!(report.metric, "mae");
        assert!(report.cells[1].mean_error < report.cells[0].mean_error);
        assert_eq!(model.spec.hyper.n_trees, 150);
        assert_eq!(report.cells[0].fold_errors.len(), 3);
    }

    #[test]
    fn classification_metric_is_f1_complement() {
        let mut rows = Vec::new();
        let mut y = Vec::new();
        let mut ids = Vec::new();
        for d in 0..9 {
            for i in 0..6 {
                let v = d as f64 + i as f64 / 10.0;
                rows.push(vec![v]);
                y.push((v > 4.0) as u8 as f64);
                ids.push(format!("d{d}"));
            }
        }
        let x = Matrix::from_rows(&rows);
        let ids: Vec<&str> = ids.iter().map(String::as_str).collect();
        let grid = vec![LearnerSpec {
            family: LearnerFamily::Tree,
            task: Task::Classify,
            hyper: HyperParams { max_depth: 2, ..Default::default() },
            seed: 0,
        }];
        let report = cross_validate(&grid, &x, &y, None, &ids, 3, 1).unwrap();
        assert_eq!(report.metric, "1-f1");
        assert!(report.cells[0].mean_error < 0.2, "{}", report.cells[0].mean_error);
    }

    #[test]
    fn empty_grid_and_scarce_diagrams_error() {
        let (x, y, ids) = grouped_problem();
        let ids: Vec<&str> = ids.iter().map(String::as_str).collect();
        assert!(matches!(
            cross_validate(&[], &x, &y, None, &ids, 3, 0),
            Err(LearnError::EmptyGrid)
        ));
        let two_ids: Vec<&str> = ids.iter().map(|_| "a").take(y.len() - 1).chain(["b"]).collect();
        assert!(matches!(
            cross_validate(&[gb(1, 1)], &x, &y, None, &two_ids, 3, 0),
            Err(LearnError::TooFewDiagrams { found: 2, needed: 3 })
        ));
    }

    #[test]
    fn report_is_deterministic() {
        let (x, y, ids) = grouped_problem();
        let ids: Vec<&str> = ids.iter().map(String::as_str).collect();
        let grid = vec![gb(2, 20), gb(3, 20)];
        let a = cross_validate(&grid, &x, &y, None, &ids, 3, 9).unwrap();
        let b = cross_validate(&grid, &x, &y, None, &ids, 3, 9).unwrap();
        assert_eq!(a, b);
    }
}
