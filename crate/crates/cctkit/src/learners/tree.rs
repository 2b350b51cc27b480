//! Exact greedy CART splitter shared by every tree-based family.
//!
//! Nodes are grown on per-row (g, h) statistics: the gain of a split is
//!   0.5 * (GL^2/(HL+lambda) + GR^2/(HR+lambda) - G^2/(H+lambda))
//! and a leaf predicts G/(H+lambda). With g = weight * target and
//! h = weight this is exactly weighted variance reduction with leaf
//! means (and, on 0/1 targets, picks the same splits as Gini); with
//! second-order boosting statistics it is the regularized Newton gain.

use rand::seq::index::sample;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::matrix::Matrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TreeNode {
    Split { feature: usize, threshold: f64, left: Box<TreeNode>, right: Box<TreeNode> },
    Leaf { leaf: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub root: TreeNode,
}

impl Tree {
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let mut node = &self.root;
        loop {
            match node {
                TreeNode::Leaf { leaf } => return *leaf,
                TreeNode::Split { feature, threshold, left, right } => {
                    node = if row[*feature] < *threshold { left } else { right };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(n: &TreeNode) -> usize {
            match n {
                TreeNode::Leaf { .. } => 0,
                TreeNode::Split { left, right, .. } => 1 + walk(left).max(walk(right)),
            }
        }
        walk(&self.root)
    }

    pub fn leaf_count(&self) -> usize {
        fn walk(n: &TreeNode) -> usize {
            match n {
                TreeNode::Leaf { .. } => 1,
                TreeNode::Split { left, right, .. } => walk(left) + walk(right),
            }
        }
        walk(&self.root)
    }

    fn leaves_mut(&mut self) -> Vec<&mut f64> {
        fn walk<'a>(n: &'a mut TreeNode, out: &mut Vec<&'a mut f64>) {
            match n {
                TreeNode::Leaf { leaf } => out.push(leaf),
                TreeNode::Split { left, right, .. } => {
                    walk(left, out);
                    walk(right, out);
                }
            }
        }
        let mut out = Vec::new();
        walk(&mut self.root, &mut out);
        out
    }

    /// Replaces every leaf value with num/(den+lambda) accumulated over
    /// the rows routed into it. Used by gradient boosting to set Newton
    /// leaf values after the structure was grown on squared error.
    /// Leaves receiving no rows are zeroed.
    pub(crate) fn reassign_leaves(
        &mut self,
        x: &Matrix,
        rows: &[usize],
        num: &[f64],
        den: &[f64],
        lambda: f64,
    ) {
        let n_leaves = {
            let mut leaves = self.leaves_mut();
            for (i, leaf) in leaves.iter_mut().enumerate() {
                **leaf = i as f64;
            }
            leaves.len()
        };
        let mut sums = vec![(0.0, 0.0); n_leaves];
        for &r in rows {
            let id = self.predict_row(x.row(r)) as usize;
            sums[id].0 += num[r];
            sums[id].1 += den[r];
        }
        for (leaf, &(n, d)) in self.leaves_mut().into_iter().zip(&sums) {
            *leaf = if d + lambda > 0.0 { n / (d + lambda).max(1e-12) } else { 0.0 };
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct TreeParams {
    pub max_depth: usize,
    pub min_leaf: usize,
    pub lambda: f64,
    pub min_split_gain: f64,
    pub feature_fraction: f64,
}

/// Grows a tree on rows `rows` of `x` with statistics (g, h).
///
/// Thresholds are midpoints between consecutive distinct feature values.
/// Ties in gain resolve to the lowest feature index, then the lowest
/// threshold; zero-gain nodes become leaves. `rng` only draws when
/// `feature_fraction < 1`.
pub(crate) fn fit_tree(
    x: &Matrix,
    g: &[f64],
    h: &[f64],
    rows: &[usize],
    params: &TreeParams,
    rng: &mut ChaCha8Rng,
) -> Tree {
    let root = grow(x, g, h, rows, params, rng, 0);
    Tree { root }
}

fn leaf_value(g_sum: f64, h_sum: f64, lambda: f64) -> f64 {
    if h_sum + lambda > 0.0 {
        g_sum / (h_sum + lambda).max(1e-12)
    } else {
        0.0
    }
}

fn grow(
    x: &Matrix,
    g: &[f64],
    h: &[f64],
    rows: &[usize],
    params: &TreeParams,
    rng: &mut ChaCha8Rng,
    depth: usize,
) -> TreeNode {
    let g_total: f64 = rows.iter().map(|&r| g[r]).sum();
    let h_total: f64 = rows.iter().map(|&r| h[r]).sum();
    let make_leaf = || TreeNode::Leaf { leaf: leaf_value(g_total, h_total, params.lambda) };

    if depth >= params.max_depth || rows.len() < 2 * params.min_leaf || rows.len() < 2 {
        return make_leaf();
    }

    let n_features = x.cols();
    let candidates: Vec<usize> = if params.feature_fraction >= 1.0 {
        (0..n_features).collect()
    } else {
        let m = ((params.feature_fraction * n_features as f64).ceil() as usize)
            .clamp(1, n_features);
        let mut idx = sample(rng, n_features, m).into_vec();
        idx.sort_unstable();
        idx
    };

    let parent_score = score(g_total, h_total, params.lambda);
    let mut best: Option<(f64, usize, f64)> = None; // (gain, feature, threshold)

    let mut order: Vec<usize> = Vec::with_capacity(rows.len());
    for &feature in &candidates {
        order.clear();
        order.extend_from_slice(rows);
        order.sort_by(|&a, &b| {
            x.get(a, feature)
                .partial_cmp(&x.get(b, feature))
                .expect("non-finite feature")
                .then(a.cmp(&b))
        });

        let mut gl = 0.0;
        let mut hl = 0.0;
        for i in 0..order.len() - 1 {
            gl += g[order[i]];
            hl += h[order[i]];
            let v = x.get(order[i], feature);
            let next = x.get(order[i + 1], feature);
            if v == next {
                continue;
            }
            let left_n = i + 1;
            let right_n = order.len() - left_n;
            if left_n < params.min_leaf || right_n < params.min_leaf {
                continue;
            }
            let gain = 0.5
                * (score(gl, hl, params.lambda) + score(g_total - gl, h_total - hl, params.lambda)
                    - parent_score);
            if gain <= params.min_split_gain || gain <= 1e-12 {
                continue;
            }
            // Strict improvement keeps the first (lowest feature, lowest
            // threshold) candidate on exact ties.
            if best.map_or(true, |(bg, _, _)| gain > bg) {
                best = Some((gain, feature, (v + next) / 2.0));
            }
        }
    }

    match best {
        None => make_leaf(),
        Some((_, feature, threshold)) => {
            let (left_rows, right_rows): (Vec<usize>, Vec<usize>) =
                rows.iter().partition(|&&r| x.get(r, feature) < threshold);
            let left = grow(x, g, h, &left_rows, params, rng, depth + 1);
            let right = grow(x, g, h, &right_rows, params, rng, depth + 1);
            TreeNode::Split { feature, threshold, left: Box::new(left), right: Box::new(right) }
        }
    }
}

fn score(g: f64, h: f64, lambda: f64) -> f64 {
    if h + lambda > 0.0 {
        g * g / (h + lambda).max(1e-12)
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(0)
    }

    fn unit_params(max_depth: usize) -> TreeParams {
        TreeParams { max_depth, min_leaf: 1, lambda: 0.0, min_split_gain: 0.0, feature_fraction: 1.0 }
    }

    fn fit_regression(x: &Matrix, y: &[f64], depth: usize) -> Tree {
        let h = vec![1.0; y.len()];
        let rows: Vec<usize> = (0..y.len()).collect();
        fit_tree(x, y, &h, &rows, &unit_params(depth), &mut rng())
    }

    #[test]
    fn stump_picks_best_midpoint_threshold() {
        let x = Matrix::from_rows(&[vec![0.0], vec![1.0], vec![2.0], vec![3.0]]);
        let y = [1.0, 1.0, 5.0, 5.0];
        let t = fit_regression(&x, &y, 1);
        match &t.root {
            TreeNode::Split { feature, threshold, left, right } => {
                assert_eq!(*feature, 0);
                assert_eq!(*threshold, 1.5);
                assert!(matches!(**left, TreeNode::Leaf { leaf } if leaf == 1.0));
                assert!(matches!(**right, TreeNode::Leaf { leaf } if leaf == 5.0));
            }
            other => panic!("expected split, got {other:?}"),
        }
    }

    #[test]
    fn gain_tie_resolves_to_lowest_threshold() {
        // Residuals (-2, 0, 0, 2): thresholds 0.5 and 2.5 tie exactly on
        // gain; the lower threshold must win.
        let x = Matrix::from_rows(&[vec![0.0], vec![1.0], vec![2.0], vec![3.0]]);
        let y = [-2.0, 0.0, 0.0, 2.0];
        let t = fit_regression(&x, &y, 1);
        match &t.root {
            TreeNode::Split { threshold, .. } => assert_eq!(*threshold, 0.5),
            other => panic!("expected split, got {other:?}"),
        }
    }

    #[test]
    fn feature_tie_resolves_to_lowest_feature() {
        // Identical columns: the split must land on feature 0.
        let x = Matrix::from_rows(&[vec![0.0, 0.0], vec![1.0, 1.0], vec![2.0, 2.0]]);
        let y = [0.0, 0.0, 3.0];
        let t = fit_regression(&x, &y, 1);
        match &t.root {
            TreeNode::Split { feature, .. } => assert_eq!(*feature, 0),
            other => panic!("expected split, got {other:?}"),
        }
    }

    #[test]
    fn constant_target_yields_single_leaf() {
        let x = Matrix::from_rows(&[vec![0.0], vec![1.0], vec![2.0]]);
        let y = [4.0, 4.0, 4.0];
        let t = fit_regression(&x, &y, 5);
        assert!(matches!(t.root, TreeNode::Leaf { leaf } if leaf == 4.0));
    }

    #[test]
    fn zero_depth_is_the_weighted_mean() {
        let x = Matrix::from_rows(&[vec![0.0], vec![1.0]]);
        let g = [2.0 * 1.0, 8.0 * 3.0]; // values 2 and 8, weights 1 and 3
        let h = [1.0, 3.0];
        let rows = [0, 1];
        let t = fit_tree(&x, &g, &h, &rows, &unit_params(0), &mut rng());
        assert!(matches!(t.root, TreeNode::Leaf { leaf } if (leaf - 6.5).abs() < 1e-12));
    }

    #[test]
    fn min_leaf_blocks_unbalanced_splits() {
        let x = Matrix::from_rows(&[vec![0.0], vec![1.0], vec![2.0], vec![3.0]]);
        let y = [0.0, 0.0, 0.0, 10.0];
        let h = vec![1.0; 4];
        let rows: Vec<usize> = (0..4).collect();
        let params = TreeParams { min_leaf: 2, ..unit_params(3) };
        let t = fit_tree(&x, &y, &h, &rows, &params, &mut rng());
        // The only legal split is 2-2; the 3-1 optimum is forbidden.
        match &t.root {
            TreeNode::Split { threshold, .. } => assert_eq!(*threshold, 1.5),
            other => panic!("expected split, got {other:?}"),
        }
    }

    #[test]
    fn depth_limit_holds() {
        let x = Matrix::from_rows(&(0..32).map(|i| vec![i as f64]).collect::<Vec<_>>());
        let y: Vec<f64> = (0..32).map(|i| (i * i) as f64).collect();
        let t = fit_regression(&x, &y, 2);
        assert!(t.depth() <= 2);
        assert!(t.leaf_count() <= 4);
    }

    #[test]
    fn min_split_gain_prunes_weak_splits() {
        let x = Matrix::from_rows(&[vec![0.0], vec![1.0], vec![2.0], vec![3.0]]);
        let y = [0.0, 0.1, 0.0, 0.1];
        let h = vec![1.0; 4];
        let rows: Vec<usize> = (0..4).collect();
        let params = TreeParams { min_split_gain: 1.0, ..unit_params(3) };
        let t = fit_tree(&x, &y, &h, &rows, &params, &mut rng());
        assert!(matches!(t.root, TreeNode::Leaf { .. }));
    }

    #[test]
    fn l2_lambda_shrinks_leaves() {
        let x = Matrix::from_rows(&[vec![0.0], vec![1.0]]);
        let y = [0.0, 10.0];
        let h = vec![1.0; 2];
        let rows = [0, 1];
        let params = TreeParams { lambda: 1.0, ..unit_params(1) };
        let t = fit_tree(&x, &y, &h, &rows, &params, &mut rng());
        match &t.root {
            TreeNode::Split { right, .. } => {
                // leaf = G/(H+lambda) = 10/(1+1).
                assert!(matches!(**right, TreeNode::Leaf { leaf } if (leaf - 5.0).abs() < 1e-12));
            }
            other => panic!("expected split, got {other:?}"),
        }
    }

    #[test]
    fn json_shape_uses_leaf_and_split_objects() {
        let x = Matrix::from_rows(&[vec![0.0], vec![1.0]]);
        let y = [0.0, 1.0];
        let t = fit_regression(&x, &y, 1);
        let json = serde_json::to_value(&t).unwrap();
        assert!(json["root"]["feature"].is_number());
        assert!(json["root"]["left"]["leaf"].is_number());
        let back: Tree = serde_json::from_value(json).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn reassign_leaves_sets_newton_values() {
        let x = Matrix::from_rows(&[vec![0.0], vec![1.0], vec![2.0], vec![3.0]]);
        let y = [0.0, 0.0, 6.0, 6.0];
        let mut t = fit_regression(&x, &y, 1);
        let rows: Vec<usize> = (0..4).collect();
        let num = [1.0, 1.0, 4.0, 4.0];
        let den = [1.0, 1.0, 1.0, 1.0];
        t.reassign_leaves(&x, &rows, &num, &den, 0.0);
        assert_eq!(t.predict_row(&[0.5]), 1.0);
        assert_eq!(t.predict_row(&[2.5]), 4.0);
    }
}
