//! From-scratch supervised learners behind one interface: k-nearest
//! neighbours, linear SVM (Pegasos), single CART trees, random forests,
//! gradient boosting and second-order (regularized) boosting.
//!
//! Every family fits through [`fit`] from a [`LearnerSpec`] and predicts
//! through [`FittedModel`], so the stack can grid-search across families
//! with diagram-grouped cross-validation and swap the winner in without
//! special cases.

mod boost;
mod cv;
mod forest;
mod knn;
mod svm;
mod tree;

pub use cv::{cross_validate, fit_with_cv, CvCell, CvReport};
pub use forest::mix_seed;
pub use tree::{Tree, TreeNode};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrix::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Task {
    Classify,
    Regress,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LearnerFamily {
    Knn,
    Svm,
    Tree,
    Forest,
    GradientBoost,
    /// Second-order boosting with L2 leaf regularization and a minimum
    /// split gain.
    ExtremeBoost,
}

/// Union of the hyperparameters across families; each family reads only
/// the fields it understands.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HyperParams {
    /// Neighbour count (kNN). Clamped to the training size.
    pub k: usize,
    /// Regularization strength (SVM).
    pub lambda: f64,
    /// Pass count over the data (SVM).
    pub svm_epochs: usize,
    /// Epsilon-insensitive tube half-width for SVM regression, in
    /// standardized target units.
    pub svm_epsilon: f64,
    /// Split levels per tree; 0 collapses to a single leaf.
    pub max_depth: usize,
    /// Minimum rows on each side of a split.
    pub min_leaf: usize,
    /// Trees per ensemble.
    pub n_trees: usize,
    /// Shrinkage for boosting.
    pub learning_rate: f64,
    /// Row fraction drawn (without replacement) per tree.
    pub subsample: f64,
    /// Feature fraction considered at each split.
    pub feature_fraction: f64,
    /// L2 penalty on leaf values (second-order boosting).
    pub l2_leaf: f64,
    /// Minimum gain to accept a split (second-order boosting).
    pub min_split_gain: f64,
}

impl Default for HyperParams {
    fn default() -> Self {
        HyperParams {
            k: 5,
            lambda: 1e-4,
            svm_epochs: 40,
            svm_epsilon: 0.1,
            max_depth: 3,
            min_leaf: 1,
            n_trees: 100,
            learning_rate: 0.1,
            subsample: 1.0,
            feature_fraction: 1.0,
            l2_leaf: 0.0,
            min_split_gain: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LearnerSpec {
    pub family: LearnerFamily,
    pub task: Task,
    pub hyper: HyperParams,
    pub seed: u64,
}

impl LearnerSpec {
    pub fn new(family: LearnerFamily, task: Task) -> Self {
        LearnerSpec { family, task, hyper: HyperParams::default(), seed: 0 }
    }

    /// Compact human-readable tag for reports.
    pub fn label(&self) -> String {
        let h = &self.hyper;
        match self.family {
            LearnerFamily::Knn => format!("knn(k={})", h.k),
            LearnerFamily::Svm => format!("svm(lambda={})", h.lambda),
            LearnerFamily::Tree => format!("tree(depth={})", h.max_depth),
            LearnerFamily::Forest => {
                format!("forest(trees={},depth={})", h.n_trees, h.max_depth)
            }
            LearnerFamily::GradientBoost => format!(
                "gb(trees={},depth={},lr={})",
                h.n_trees, h.max_depth, h.learning_rate
            ),
            LearnerFamily::ExtremeBoost => format!(
                "xb(trees={},depth={},lr={},l2={})",
                h.n_trees, h.max_depth, h.learning_rate, h.l2_leaf
            ),
        }
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum LearnError {
    #[error("need at least 2 training rows, got {rows}")]
    EmptyData { rows: usize },
    #[error("non-finite value in targets")]
    NonFiniteTarget,
    #[error("non-finite value in features")]
    NonFiniteFeature,
    #[error("classification labels must be 0 or 1, got {value}")]
    InvalidLabel { value: f64 },
    #[error("bad sample weights: {0}")]
    BadWeights(String),
    #[error("expected {expected} feature columns, got {got}")]
    WidthMismatch { expected: usize, got: usize },
    #[error("model grid is empty")]
    EmptyGrid,
    #[error("need at least {needed} distinct diagrams for grouped validation, found {found}")]
    TooFewDiagrams { found: usize, needed: usize },
    #[error("operation not supported for this task: {0}")]
    TaskMismatch(String),
}

/// Fitted parameters, by family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ModelKind {
    /// Degenerate fits (single-class training sets) collapse to this.
    Constant { value: f64 },
    Knn { x: Matrix, y: Vec<f64>, w: Vec<f64> },
    /// Augmented weight vector; the last entry is the bias. Regression
    /// targets are standardized internally.
    Svm { weights: Vec<f64>, y_mean: f64, y_std: f64 },
    Forest { trees: Vec<Tree> },
    Boosted { base: f64, trees: Vec<Tree> },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitMeta {
    pub n_rows: usize,
    pub n_features: usize,
    /// True when the training labels held a single class and the model
    /// degenerated to a constant.
    pub single_class: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedModel {
    pub spec: LearnerSpec,
    pub kind: ModelKind,
    pub meta: FitMeta,
}

pub(crate) fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

fn validate_inputs(
    x: &Matrix,
    y: &[f64],
    w: Option<&[f64]>,
    task: Task,
) -> Result<Vec<f64>, LearnError> {
    if x.rows() < 2 {
        return Err(LearnError::EmptyData { rows: x.rows() });
    }
    if x.rows() != y.len() {
        return Err(LearnError::WidthMismatch { expected: x.rows(), got: y.len() });
    }
    if x.as_slice().iter().any(|v| !v.is_finite()) {
        return Err(LearnError::NonFiniteFeature);
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(LearnError::NonFiniteTarget);
    }
    if task == Task::Classify {
        if let Some(&bad) = y.iter().find(|&&v| v != 0.0 && v != 1.0) {
            return Err(LearnError::InvalidLabel { value: bad });
        }
    }
    let w = match w {
        Some(w) => {
            if w.len() != y.len() {
                return Err(LearnError::BadWeights(format!(
                    "{} weights for {} rows",
                    w.len(),
                    y.len()
                )));
            }
            if w.iter().any(|v| !v.is_finite() || *v < 0.0) {
                return Err(LearnError::BadWeights("negative or non-finite weight".into()));
            }
            if w.iter().sum::<f64>() <= 0.0 {
                return Err(LearnError::BadWeights("weights sum to zero".into()));
            }
            w.to_vec()
        }
        None => vec![1.0; y.len()],
    };
    Ok(w)
}

/// Fits one model. Classification labels are 0/1; optional non-negative
/// sample weights scale each row's influence. A single-class training set
/// yields a constant model flagged in `meta.single_class`.
pub fn fit(
    x: &Matrix,
    y: &[f64],
    sample_weight: Option<&[f64]>,
    spec: &LearnerSpec,
) -> Result<FittedModel, LearnError> {
    let w = validate_inputs(x, y, sample_weight, spec.task)?;
    let meta = FitMeta { n_rows: x.rows(), n_features: x.cols(), single_class: false };

    if spec.task == Task::Classify {
        let first = y[0];
        if y.iter().all(|&v| v == first) {
            return Ok(FittedModel {
                spec: *spec,
                kind: ModelKind::Constant { value: first },
                meta: FitMeta { single_class: true, ..meta },
            });
        }
    }

    let kind = match spec.family {
        LearnerFamily::Knn => ModelKind::Knn { x: x.clone(), y: y.to_vec(), w },
        LearnerFamily::Svm => svm::fit_svm(x, y, &w, spec),
        LearnerFamily::Tree => ModelKind::Forest { trees: vec![forest::fit_single_tree(x, y, &w, spec)] },
        LearnerFamily::Forest => ModelKind::Forest { trees: forest::fit_forest(x, y, &w, spec) },
        LearnerFamily::GradientBoost => boost::fit_gradient_boost(x, y, &w, spec),
        LearnerFamily::ExtremeBoost => boost::fit_extreme_boost(x, y, &w, spec),
    };
    Ok(FittedModel { spec: *spec, kind, meta })
}

impl FittedModel {
    /// A model that ignores its inputs. Used when a sub-model has too
    /// little data to train and must fall back to a fixed output.
    pub fn constant(spec: LearnerSpec, value: f64, n_features: usize) -> Self {
        FittedModel {
            spec,
            kind: ModelKind::Constant { value },
            meta: FitMeta { n_rows: 0, n_features, single_class: true },
        }
    }

    fn check_width(&self, got: usize) -> Result<(), LearnError> {
        // Constant models never look at features, so any width passes.
        if matches!(self.kind, ModelKind::Constant { .. }) || got == self.meta.n_features {
            Ok(())
        } else {
            Err(LearnError::WidthMismatch { expected: self.meta.n_features, got })
        }
    }

    /// Regression value, or classification score in [0, 1].
    pub fn predict_row(&self, row: &[f64]) -> Result<f64, LearnError> {
        self.check_width(row.len())?;
        if row.iter().any(|v| !v.is_finite()) {
            return Err(LearnError::NonFiniteFeature);
        }
        Ok(self.predict_row_unchecked(row))
    }

    fn predict_row_unchecked(&self, row: &[f64]) -> f64 {
        match &self.kind {
            ModelKind::Constant { value } => *value,
            ModelKind::Knn { x, y, w } => knn::knn_predict(x, y, w, row, self.spec.hyper.k),
            ModelKind::Svm { weights, y_mean, y_std } => {
                let raw = svm::decision(weights, row);
                match self.spec.task {
                    Task::Classify => sigmoid(raw),
                    Task::Regress => raw * y_std + y_mean,
                }
            }
            ModelKind::Forest { trees } => {
                let score: f64 = match self.spec.task {
                    // Majority vote; each tree's vote is its leaf mean
                    // thresholded at 1/2. Exactly split votes score 0.5
                    // and resolve toward the lower class.
                    Task::Classify => {
                        trees.iter().map(|t| (t.predict_row(row) > 0.5) as u8 as f64).sum::<f64>()
                    }
                    Task::Regress => trees.iter().map(|t| t.predict_row(row)).sum(),
                };
                score / trees.len() as f64
            }
            ModelKind::Boosted { base, trees } => {
                let raw = base
                    + self.spec.hyper.learning_rate
                        * trees.iter().map(|t| t.predict_row(row)).sum::<f64>();
                match self.spec.task {
                    Task::Classify => sigmoid(raw),
                    Task::Regress => raw,
                }
            }
        }
    }

    pub fn predict(&self, x: &Matrix) -> Result<Vec<f64>, LearnError> {
        self.check_width(x.cols())?;
        if x.as_slice().iter().any(|v| !v.is_finite()) {
            return Err(LearnError::NonFiniteFeature);
        }
        Ok(x.iter_rows().map(|r| self.predict_row_unchecked(r)).collect())
    }

    /// Presence labels: score strictly above 1/2.
    pub fn predict_labels(&self, x: &Matrix) -> Result<Vec<bool>, LearnError> {
        if self.spec.task != Task::Classify {
            return Err(LearnError::TaskMismatch("labels from a regression model".into()));
        }
        Ok(self.predict(x)?.into_iter().map(|s| s > 0.5).collect())
    }
}
