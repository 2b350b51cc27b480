//! Boosted tree ensembles.
//!
//! `GradientBoost` is classic stagewise boosting: trees are grown by
//! squared error on the negative gradient; for logistic loss the leaf
//! values are then replaced by one Newton step. `ExtremeBoost` carries
//! the second-order statistics into the splits themselves and adds L2
//! leaf shrinkage plus a minimum split gain.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::forest::{mix_seed, subsample_rows};
use super::tree::{fit_tree, TreeParams};
use super::{sigmoid, LearnerSpec, ModelKind, Task};
use crate::matrix::Matrix;

fn tree_params(spec: &LearnerSpec, second_order: bool) -> TreeParams {
    TreeParams {
        max_depth: spec.hyper.max_depth,
        min_leaf: spec.hyper.min_leaf.max(1),
        lambda: if second_order { spec.hyper.l2_leaf } else { 0.0 },
        min_split_gain: if second_order { spec.hyper.min_split_gain } else { 0.0 },
        feature_fraction: spec.hyper.feature_fraction,
    }
}

fn weighted_mean(y: &[f64], w: &[f64]) -> f64 {
    let sw: f64 = w.iter().sum();
    y.iter().zip(w).map(|(&yi, &wi)| yi * wi).sum::<f64>() / sw
}

fn base_score(y: &[f64], w: &[f64], task: Task) -> f64 {
    match task {
        Task::Regress => weighted_mean(y, w),
        Task::Classify => {
            let p = weighted_mean(y, w).clamp(1e-6, 1.0 - 1e-6);
            (p / (1.0 - p)).ln()
        }
    }
}

pub(crate) fn fit_gradient_boost(
    x: &Matrix,
    y: &[f64],
    w: &[f64],
    spec: &LearnerSpec,
) -> ModelKind {
    let n = y.len();
    let base = base_score(y, w, spec.task);
    let params = tree_params(spec, false);
    let lr = spec.hyper.learning_rate;
    let mut score = vec![base; n];
    let mut trees = Vec::with_capacity(spec.hyper.n_trees);

    for t in 0..spec.hyper.n_trees as u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(spec.seed, t));
        let rows = subsample_rows(n, spec.hyper.subsample, &mut rng);

        // Negative gradient of the loss at the current score.
        let residual: Vec<f64> = match spec.task {
            Task::Regress => y.iter().zip(&score).map(|(&yi, &s)| yi - s).collect(),
            Task::Classify => {
                y.iter().zip(&score).map(|(&yi, &s)| yi - sigmoid(s)).collect()
            }
        };
        let g: Vec<f64> = residual.iter().zip(w).map(|(&r, &wi)| r * wi).collect();
        let mut tree = fit_tree(x, &g, w, &rows, &params, &mut rng);

        if spec.task == Task::Classify {
            // Structure came from squared error on residuals; leaves take
            // a Newton step for logistic loss.
            let hess: Vec<f64> = score
                .iter()
                .zip(w)
                .map(|(&s, &wi)| {
                    let p = sigmoid(s);
                    p * (1.0 - p) * wi
                })
                .collect();
            tree.reassign_leaves(x, &rows, &g, &hess, 0.0);
        }

        for (s, row) in score.iter_mut().zip(x.iter_rows()) {
            *s += lr * tree.predict_row(row);
        }
        trees.push(tree);
    }
    ModelKind::Boosted { base, trees }
}

pub(crate) fn fit_extreme_boost(
    x: &Matrix,
    y: &[f64],
    w: &[f64],
    spec: &LearnerSpec,
) -> ModelKind {
    let n = y.len();
    let base = base_score(y, w, spec.task);
    let params = tree_params(spec, true);
    let lr = spec.hyper.learning_rate;
    let mut score = vec![base; n];
    let mut trees = Vec::with_capacity(spec.hyper.n_trees);

    for t in 0..spec.hyper.n_trees as u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(spec.seed, t));
        let rows = subsample_rows(n, spec.hyper.subsample, &mut rng);

        // fit_tree predicts G/(H+lambda), so g holds the negative
        // gradient and the Newton leaf -grad/(hess+lambda) falls out.
        let (g, h): (Vec<f64>, Vec<f64>) = match spec.task {
            Task::Regress => (
                y.iter().zip(&score).zip(w).map(|((&yi, &s), &wi)| (yi - s) * wi).collect(),
                w.to_vec(),
            ),
            Task::Classify => {
                let mut g = Vec::with_capacity(n);
                let mut h = Vec::with_capacity(n);
                for ((&yi, &s), &wi) in y.iter().zip(&score).zip(w) {
                    let p = sigmoid(s);
                    g.push((yi - p) * wi);
                    h.push((p * (1.0 - p)).max(1e-12) * wi);
                }
                (g, h)
            }
        };
        let tree = fit_tree(x, &g, &h, &rows, &params, &mut rng);
        for (s, row) in score.iter_mut().zip(x.iter_rows()) {
            *s += lr * tree.predict_row(row);
        }
        trees.push(tree);
    }
    ModelKind::Boosted { base, trees }
}
