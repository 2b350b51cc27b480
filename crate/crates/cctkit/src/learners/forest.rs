//! Random forests: seeded row subsampling per tree, per-split feature
//! subsets, trees grown in parallel in a fixed order.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::tree::{fit_tree, Tree, TreeParams};
use super::LearnerSpec;
use crate::matrix::Matrix;

/// Decorrelates derived generators from (seed, stream index).
pub fn mix_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_mul(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

fn tree_params(spec: &LearnerSpec) -> TreeParams {
    TreeParams {
        max_depth: spec.hyper.max_depth,
        min_leaf: spec.hyper.min_leaf.max(1),
        lambda: 0.0,
        min_split_gain: 0.0,
        feature_fraction: spec.hyper.feature_fraction,
    }
}

/// Draws the row sample for one tree; `frac >= 1` keeps every row.
pub(crate) fn subsample_rows(n: usize, frac: f64, rng: &mut ChaCha8Rng) -> Vec<usize> {
    if frac >= 1.0 {
        return (0..n).collect();
    }
    let m = ((frac * n as f64).floor() as usize).clamp(1, n);
    let mut rows = sample(rng, n, m).into_vec();
    rows.sort_unstable();
    rows
}

pub(crate) fn fit_single_tree(x: &Matrix, y: &[f64], w: &[f64], spec: &LearnerSpec) -> Tree {
    let g: Vec<f64> = y.iter().zip(w).map(|(&yi, &wi)| yi * wi).collect();
    let rows: Vec<usize> = (0..y.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    fit_tree(x, &g, w, &rows, &tree_params(spec), &mut rng)
}

pub(crate) fn fit_forest(x: &Matrix, y: &[f64], w: &[f64], spec: &LearnerSpec) -> Vec<Tree> {
    let g: Vec<f64> = y.iter().zip(w).map(|(&yi, &wi)| yi * wi).collect();
    let params = tree_params(spec);
    (0..spec.hyper.n_trees.max(1) as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(spec.seed, t));
            let rows = subsample_rows(y.len(), spec.hyper.subsample, &mut rng);
            fit_tree(x, &g, w, &rows, &params, &mut rng)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learners::{fit, LearnerFamily, Task};

    fn grid_data() -> (Matrix, Vec<f64>) {
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for i in 0..10 {
            for j in 0..10 {
                rows.push(vec![i as f64, j as f64]);
                y.push(((i + j) % 2 == 0) as u8 as f64);
            }
        }
        (Matrix::from_rows(&rows), y)
    }

    #[test]
    fn full_sample_identical_seeds_equal_one_tree() {
        let (x, y) = grid_data();
        let mut spec = LearnerSpec::new(LearnerFamily::Forest, Task::Classify);
        spec.hyper.subsample = 1.0;
        spec.hyper.feature_fraction = 1.0;
        spec.hyper.n_trees = 7;
        spec.hyper.max_depth = 4;
        let forest = fit(&x, &y, None, &spec).unwrap();

        let mut tree_spec = spec;
        tree_spec.family = LearnerFamily::Tree;
        let single = fit(&x, &y, None, &tree_spec).unwrap();

        // Without row or feature randomness every tree is the same CART
        // fit, so the vote equals the single tree's label everywhere.
        assert_eq!(forest.predict_labels(&x).unwrap(), single.predict_labels(&x).unwrap());
    }

    #[test]
    fn subsampled_forest_is_deterministic_per_seed() {
        let (x, y) = grid_data();
        let mut spec = LearnerSpec::new(LearnerFamily::Forest, Task::Classify);
        spec.hyper.subsample = 0.6;
        spec.hyper.feature_fraction = 0.5;
        spec.hyper.n_trees = 15;
        let a = fit(&x, &y, None, &spec).unwrap();
        let b = fit(&x, &y, None, &spec).unwrap();
        assert_eq!(a, b);
        spec.seed = 1;
        let c = fit(&x, &y, None, &spec).unwrap();
        assert_ne!(a, c, "different seed should draw different subsamples");
    }

    #[test]
    fn forest_regression_averages_trees() {
        let x = Matrix::from_rows(&(0..20).map(|i| vec![i as f64]).collect::<Vec<_>>());
        let y: Vec<f64> = (0..20).map(|i| 3.0 * i as f64).collect();
        let mut spec = LearnerSpec::new(LearnerFamily::Forest, Task::Regress);
        spec.hyper.n_trees = 25;
        spec.hyper.max_depth = 5;
        spec.hyper.subsample = 0.8;
        let m = fit(&x, &y, None, &spec).unwrap();
        let pred = m.predict(&x).unwrap();
        let mae: f64 =
            pred.iter().zip(&y).map(|(p, t)| (p - t).abs()).sum::<f64>() / y.len() as f64;
        assert!(mae < 3.0, "mae {mae}");
    }

    #[test]
    fn subsample_rows_draws_exact_count_without_replacement() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let rows = subsample_rows(50, 0.4, &mut rng);
        assert_eq!(rows.len(), 20);
        let unique: std::collections::HashSet<_> = rows.iter().collect();
        assert_eq!(unique.len(), 20);
        assert!(rows.iter().all(|&r| r < 50));
    }

    #[test]
    fn exact_vote_split_resolves_to_absent() {
        use super::super::{FitMeta, FittedModel, HyperParams, ModelKind};
        use crate::learners::tree::TreeNode;
        // Hand-built 2-tree forest voting 1 and 0: score 0.5 -> absent.
        let leaf = |v: f64| Tree { root: TreeNode::Leaf { leaf: v } };
        let spec = LearnerSpec {
            family: LearnerFamily::Forest,
            task: Task::Classify,
            hyper: HyperParams::default(),
            seed: 0,
        };
        let m = FittedModel {
            spec,
            kind: ModelKind::Forest { trees: vec![leaf(1.0), leaf(0.0)] },
            meta: FitMeta { n_rows: 2, n_features: 1, single_class: false },
        };
        let x = Matrix::from_rows(&[vec![0.0]]);
        assert_eq!(m.predict(&x).unwrap(), vec![0.5]);
        assert_eq!(m.predict_labels(&x).unwrap(), vec![false]);
    }
}
