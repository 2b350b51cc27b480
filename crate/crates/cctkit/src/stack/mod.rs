//! The stacked CCT model: 14 sub-models wired so that upstream outputs
//! feed downstream feature vectors.
//!
//! The wiring is data, not code: a [`WiringManifest`] lists every
//! sub-model with its expected feature columns, derived columns name the
//! upstream model they come from, and the manifest is checked for
//! acyclicity and agreement with the trained models both after training
//! and when a bundle is loaded.

pub mod augment;
pub mod predict;
pub mod train;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{
    Austenitization, Composition, Phase, StandardScaler, ValidationError, FEATURE_NAMES,
};
use crate::learners::{CvReport, FittedModel, LearnError, LearnerSpec, Task};
use crate::nn::{FractionConfig, FractionNet, NnError, TrainingLog};

pub use augment::{anchor_equilibrium, augment_presence};
pub use predict::{
    consistency_diagnostic, generate_diagram, predict_point, ConsistencyReport,
    DEFAULT_RATE_BOUNDS,
};
pub use train::train_stack;

/// Bundle layout version; bumped on any incompatible change.
pub const BUNDLE_SCHEMA: u32 = 1;

/// Identity of one sub-model in the stack, in training order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SubModelId {
    Ac1,
    Ac3,
    Fractions,
    PresenceF,
    PresenceP,
    PresenceB,
    PresenceM,
    StartF,
    StartP,
    StartB,
    StartM,
    RangeF,
    RangeP,
    RangeB,
}

impl SubModelId {
    pub const ALL: [SubModelId; 14] = [
        SubModelId::Ac1,
        SubModelId::Ac3,
        SubModelId::Fractions,
        SubModelId::PresenceF,
        SubModelId::PresenceP,
        SubModelId::PresenceB,
        SubModelId::PresenceM,
        SubModelId::StartF,
        SubModelId::StartP,
        SubModelId::StartB,
        SubModelId::StartM,
        SubModelId::RangeF,
        SubModelId::RangeP,
        SubModelId::RangeB,
    ];

    pub fn label(self) -> &'static str {
        match self {
            SubModelId::Ac1 => "ac1",
            SubModelId::Ac3 => "ac3",
            SubModelId::Fractions => "fractions",
            SubModelId::PresenceF => "presence_F",
            SubModelId::PresenceP => "presence_P",
            SubModelId::PresenceB => "presence_B",
            SubModelId::PresenceM => "presence_M",
            SubModelId::StartF => "start_F",
            SubModelId::StartP => "start_P",
            SubModelId::StartB => "start_B",
            SubModelId::StartM => "start_M",
            SubModelId::RangeF => "range_F",
            SubModelId::RangeP => "range_P",
            SubModelId::RangeB => "range_B",
        }
    }

    pub fn task(self) -> Task {
        match self {
            SubModelId::PresenceF
            | SubModelId::PresenceP
            | SubModelId::PresenceB
            | SubModelId::PresenceM => Task::Classify,
            _ => Task::Regress,
        }
    }

    /// The phase this sub-model concerns, if it is phase-specific.
    pub fn phase(self) -> Option<Phase> {
        match self {
            SubModelId::PresenceF | SubModelId::StartF | SubModelId::RangeF => {
                Some(Phase::Ferrite)
            }
            SubModelId::PresenceP | SubModelId::StartP | SubModelId::RangeP => {
                Some(Phase::Pearlite)
            }
            SubModelId::PresenceB | SubModelId::StartB | SubModelId::RangeB => {
                Some(Phase::Bainite)
            }
            SubModelId::PresenceM | SubModelId::StartM => Some(Phase::Martensite),
            _ => None,
        }
    }
}

impl std::fmt::Display for SubModelId {
    fn fmt(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// Derived feature column names. Everything else is a base column from
/// [`FEATURE_NAMES`].
pub const PRED_FS: &str = "pred_Fs";
pub const PRED_PS: &str = "pred_Ps";
pub const PRED_BS: &str = "pred_Bs";
pub const FRAC_F: &str = "frac_F";
pub const FRAC_P: &str = "frac_P";

/// Which sub-model produces a derived feature column, if any.
pub fn feature_dependency(name: &str) -> Option<SubModelId> {
    match name {
        PRED_FS => Some(SubModelId::StartF),
        PRED_PS => Some(SubModelId::StartP),
        PRED_BS => Some(SubModelId::StartB),
        FRAC_F | FRAC_P => Some(SubModelId::Fractions),
        _ => None,
    }
}

pub fn base_feature_names() -> Vec<String> {
    FEATURE_NAMES.iter().map(|s| s.to_string()).collect()
}

/// The standard feature list of one sub-model: all base columns plus the
/// stacked couplings (start temperatures feed their range models, the
/// ferrite start feeds the pearlite start, and the ferrite/pearlite
/// fractions feed the bainite start).
pub fn features_for(id: SubModelId) -> Vec<String> {
    let mut f = base_feature_names();
    match id {
        SubModelId::StartP | SubModelId::RangeF => f.push(PRED_FS.into()),
        SubModelId::RangeP => f.push(PRED_PS.into()),
        SubModelId::RangeB => f.push(PRED_BS.into()),
        SubModelId::StartB => {
            f.push(FRAC_F.into());
            f.push(FRAC_P.into());
        }
        _ => {}
    }
    f
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WiringEntry {
    pub id: SubModelId,
    pub features: Vec<String>,
}

/// Declared feature wiring of the whole stack.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WiringManifest {
    pub entries: Vec<WiringEntry>,
}

impl WiringManifest {
    pub fn standard() -> Self {
        WiringManifest {
            entries: SubModelId::ALL
                .iter()
                .map(|&id| WiringEntry { id, features: features_for(id) })
                .collect(),
        }
    }

    pub fn entry(&self, id: SubModelId) -> Option<&WiringEntry> {
        self.entries.iter().find(|e| e.id == id)
    }

    fn dependencies(&self, id: SubModelId) -> Vec<SubModelId> {
        self.entry(id)
            .map(|e| e.features.iter().filter_map(|f| feature_dependency(f)).collect())
            .unwrap_or_default()
    }

    /// All sub-models in an order where every dependency precedes its
    /// dependents. Fails on cycles, duplicates, or missing sub-models.
    pub fn training_order(&self) -> Result<Vec<SubModelId>, StackError> {
        if self.entries.len() != SubModelId::ALL.len() {
            return Err(StackError::BundleInvalid(format!(
                "wiring lists {} sub-models, expected {}",
                self.entries.len(),
                SubModelId::ALL.len()
            )));
        }
        for id in SubModelId::ALL {
            if self.entry(id).is_none() {
                return Err(StackError::BundleInvalid(format!("wiring is missing {id}")));
            }
        }
        let base: std::collections::HashSet<&str> =
            FEATURE_NAMES.iter().copied().collect();
        for e in &self.entries {
            for f in &e.features {
                if feature_dependency(f).is_none() && !base.contains(f.as_str()) {
                    return Err(StackError::BundleInvalid(format!(
                        "sub-model {} expects unknown feature `{f}`",
                        e.id
                    )));
                }
            }
        }
        let mut order = Vec::new();
        let mut placed = std::collections::HashSet::new();
        while order.len() < SubModelId::ALL.len() {
            let before = order.len();
            for id in SubModelId::ALL {
                if placed.contains(&id) {
                    continue;
                }
                if self.dependencies(id).iter().all(|d| placed.contains(d)) {
                    placed.insert(id);
                    order.push(id);
                }
            }
            if order.len() == before {
                return Err(StackError::BundleInvalid(
                    "wiring contains a dependency cycle".into(),
                ));
            }
        }
        Ok(order)
    }
}

/// One trained learner sub-model together with its input contract.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubModel {
    pub id: SubModelId,
    pub features: Vec<String>,
    pub scaler: StandardScaler,
    pub model: FittedModel,
    /// Model-selection record, absent for forced constant models.
    pub cv: Option<CvReport>,
}

impl SubModel {
    /// Predicts from an unscaled feature row in manifest order.
    pub fn predict_one(&self, features: &[f64]) -> Result<f64, LearnError> {
        let scaled = self.scaler.transform_row(features).map_err(|_| {
            LearnError::WidthMismatch { expected: self.features.len(), got: features.len() }
        })?;
        self.model.predict_row(&scaled)
    }
}

/// The trained phase-fraction network with its input contract.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FractionSubModel {
    pub features: Vec<String>,
    pub scaler: StandardScaler,
    pub net: FractionNet,
    pub log: TrainingLog,
}

impl FractionSubModel {
    pub fn predict_one(&self, features: &[f64]) -> Result<[f64; 4], NnError> {
        let scaled = self
            .scaler
            .transform_row(features)
            .map_err(|_| NnError::WidthMismatch {
                expected: self.features.len(),
                got: features.len(),
            })?;
        self.net.predict_fractions(&scaled)
    }
}

/// Candidate grids and physics-rule switches for stack training.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StackConfig {
    pub seed: u64,
    /// Diagram-grouped folds for model selection and stacked features.
    pub folds: usize,
    /// Synthetic presence points inserted per gap between consecutive
    /// positive rates (rule: interpolate within observed presence).
    pub points_per_gap: usize,
    pub augment_presence: bool,
    /// Inject one near-equilibrium row per alloy tying the ferrite and
    /// pearlite starts to the predicted critical temperatures.
    pub anchor_equilibrium: bool,
    pub log_rate_anchor: f64,
    pub anchor_weight: f64,
    /// Bainite presence is overridden to absent when the predicted
    /// ferrite plus pearlite fraction reaches this threshold.
    pub override_threshold: f64,
    /// A phase with fewer positive rows than this trains as a constant
    /// absent classifier (and a constant regressor), flagged in the
    /// diagnostics.
    pub min_rows: usize,
    /// Ablation switch: feed measured upstream values instead of
    /// out-of-fold predictions while training downstream models.
    pub stacking_from_measured: bool,
    /// Optional hard clamps Fs := min(Fs, Ac3), Ps := min(Ps, Ac1) at
    /// prediction time; off by default, consistency is learned instead.
    pub hard_consistency_clamp: bool,
    pub classify_grid: Vec<LearnerSpec>,
    pub regress_grid: Vec<LearnerSpec>,
    pub fraction_net: FractionConfig,
}

impl Default for StackConfig {
    fn default() -> Self {
        StackConfig {
            seed: 0,
            folds: 3,
            points_per_gap: 2,
            augment_presence: true,
            anchor_equilibrium: true,
            log_rate_anchor: -4.0,
            anchor_weight: 1.0,
            override_threshold: 0.995,
            min_rows: 8,
            stacking_from_measured: false,
            hard_consistency_clamp: false,
            classify_grid: default_classify_grid(0),
            regress_grid: default_regress_grid(0),
            fraction_net: FractionConfig::default(),
        }
    }
}

impl StackConfig {
    /// Default configuration with every seed derived from `seed`.
    pub fn seeded(seed: u64) -> Self {
        StackConfig {
            seed,
            classify_grid: default_classify_grid(seed),
            regress_grid: default_regress_grid(seed),
            fraction_net: FractionConfig { seed, ..FractionConfig::default() },
            ..StackConfig::default()
        }
    }
}

/// One candidate per learner family, sized for thousands of rows.
pub fn default_classify_grid(seed: u64) -> Vec<LearnerSpec> {
    use crate::learners::{HyperParams, LearnerFamily};
    let base = HyperParams::default();
    let task = Task::Classify;
    let spec = |family, hyper| LearnerSpec { family, task, hyper, seed };
    vec![
        spec(LearnerFamily::Knn, HyperParams { k: 5, ..base }),
        spec(LearnerFamily::Svm, HyperParams { lambda: 1e-4, svm_epochs: 40, ..base }),
        spec(LearnerFamily::Tree, HyperParams { max_depth: 6, min_leaf: 2, ..base }),
        spec(
            LearnerFamily::Forest,
            HyperParams {
                n_trees: 100,
                max_depth: 10,
                subsample: 0.8,
                feature_fraction: 0.5,
                ..base
            },
        ),
        spec(
            LearnerFamily::GradientBoost,
            HyperParams { n_trees: 150, max_depth: 3, learning_rate: 0.1, ..base },
        ),
        spec(
            LearnerFamily::ExtremeBoost,
            HyperParams { n_trees: 150, max_depth: 3, learning_rate: 0.1, l2_leaf: 1.0, ..base },
        ),
    ]
}

pub fn default_regress_grid(seed: u64) -> Vec<LearnerSpec> {
    use crate::learners::{HyperParams, LearnerFamily};
    let base = HyperParams::default();
    let task = Task::Regress;
    let spec = |family, hyper| LearnerSpec { family, task, hyper, seed };
    vec![
        spec(LearnerFamily::Knn, HyperParams { k: 5, ..base }),
        spec(
            LearnerFamily::Svm,
            HyperParams { lambda: 1e-4, svm_epochs: 60, svm_epsilon: 0.05, ..base },
        ),
        spec(LearnerFamily::Tree, HyperParams { max_depth: 6, min_leaf: 2, ..base }),
        spec(
            LearnerFamily::Forest,
            HyperParams {
                n_trees: 100,
                max_depth: 12,
                min_leaf: 2,
                subsample: 0.8,
                feature_fraction: 0.7,
                ..base
            },
        ),
        spec(
            LearnerFamily::GradientBoost,
            HyperParams { n_trees: 300, max_depth: 4, learning_rate: 0.08, ..base },
        ),
        spec(
            LearnerFamily::ExtremeBoost,
            HyperParams { n_trees: 300, max_depth: 4, learning_rate: 0.08, l2_leaf: 1.0, ..base },
        ),
    ]
}

/// Row counts and per-sub-model selection results from one training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct TrainDiagnostics {
    pub rows_measured: usize,
    pub rows_augmented: usize,
    pub rows_anchor: usize,
    /// Rows with a complete fraction simplex, used by the fraction net.
    pub fraction_rows: usize,
    /// Rows carrying fractions that do not sum to one, skipped.
    pub fraction_rows_skipped: usize,
    /// Sub-models trained as constants for lack of data.
    pub forced_constant: Vec<SubModelId>,
    /// Chosen learner label and mean CV error per learner sub-model.
    /// The error is None when too few diagrams existed to cross-validate.
    pub chosen: Vec<(SubModelId, String, Option<f64>)>,
    /// Out-of-fold feature requests served by the final model because a
    /// fold slice was too small to train on.
    pub oof_fallbacks: usize,
}

/// Everything needed to predict: 13 learner sub-models, the fraction
/// net, their scalers, the wiring, and the training provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelBundle {
    pub schema: u32,
    pub config: StackConfig,
    pub manifest: WiringManifest,
    pub models: Vec<SubModel>,
    pub fractions: FractionSubModel,
    pub diagnostics: TrainDiagnostics,
    /// Diagrams the bundle was trained on; evaluation proves test-set
    /// disjointness against this list.
    pub train_diagram_ids: Vec<String>,
}

impl ModelBundle {
    pub fn model(&self, id: SubModelId) -> Result<&SubModel, StackError> {
        self.models
            .iter()
            .find(|m| m.id == id)
            .ok_or_else(|| StackError::BundleInvalid(format!("missing sub-model {id}")))
    }

    /// Checks the 14-sub-model inventory, wiring acyclicity, and that
    /// every trained model matches its declared feature contract.
    pub fn validate(&self) -> Result<(), StackError> {
        if self.schema != BUNDLE_SCHEMA {
            return Err(StackError::BundleInvalid(format!(
                "bundle schema {} unsupported, expected {BUNDLE_SCHEMA}",
                self.schema
            )));
        }
        self.manifest.training_order()?;
        if self.models.len() + 1 != SubModelId::ALL.len() {
            return Err(StackError::BundleInvalid(format!(
                "bundle holds {} learner sub-models plus the fraction net, expected {}",
                self.models.len(),
                SubModelId::ALL.len() - 1
            )));
        }
        for id in SubModelId::ALL {
            let features = match id {
                SubModelId::Fractions => &self.fractions.features,
                _ => &self.model(id)?.features,
            };
            let declared = &self
                .manifest
                .entry(id)
                .ok_or_else(|| StackError::BundleInvalid(format!("wiring is missing {id}")))?
                .features;
            if features != declared {
                return Err(StackError::BundleInvalid(format!(
                    "sub-model {id} was trained on {features:?} but the wiring declares {declared:?}"
                )));
            }
            if id != SubModelId::Fractions {
                let m = self.model(id)?;
                if m.model.spec.task != id.task() {
                    return Err(StackError::BundleInvalid(format!(
                        "sub-model {id} carries a {:?} learner",
                        m.model.spec.task
                    )));
                }
            }
        }
        Ok(())
    }
}

/// The model outputs for one alloy at one cooling rate, after the
/// override and clamp rules. Temperatures are reported for present
/// phases only; martensite has no finish.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhasePrediction {
    pub log_rate: f64,
    /// F, P, B, M presence after the fraction override.
    pub present: [bool; 4],
    pub start: [Option<f64>; 4],
    pub finish: [Option<f64>; 4],
    pub fractions: [f64; 4],
    pub ac1: f64,
    pub ac3: f64,
    /// Bainite was classified present but suppressed because the
    /// ferrite plus pearlite fraction reached the override threshold.
    pub override_applied: bool,
    /// The bainite finish was raised to the martensite start.
    pub clamp_applied: bool,
    /// The pearlite-start feature used the ferrite-start regressor's
    /// raw output although ferrite was classified absent.
    pub fs_feature_raw: bool,
}

impl PhasePrediction {
    /// Human-readable invariant breaches; empty means the prediction is
    /// internally consistent.
    pub fn invariant_violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (k, phase) in Phase::ALL.iter().enumerate() {
            if self.present[k] {
                if self.start[k].is_none() {
                    out.push(format!("{phase} present without a start temperature"));
                }
                if k < 3 && self.finish[k].is_none() {
                    out.push(format!("{phase} present without a finish temperature"));
                }
            } else if self.start[k].is_some() || self.finish[k].is_some() {
                out.push(format!("{phase} absent but carries temperatures"));
            }
            if let (Some(s), Some(f)) = (self.start[k], self.finish[k]) {
                if f > s {
                    out.push(format!("{phase} finish {f:.3} above start {s:.3}"));
                }
            }
        }
        if let (Some(bf), Some(ms)) = (self.finish[2], self.start[3]) {
            if bf < ms {
                out.push(format!("bainite finish {bf:.3} below martensite start {ms:.3}"));
            }
        }
        let sum: f64 = self.fractions.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            out.push(format!("fractions sum to {sum:.12}"));
        }
        if self.fractions.iter().any(|&f| !(0.0..=1.0 + 1e-9).contains(&f)) {
            out.push("a fraction lies outside [0, 1]".into());
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LocusKind {
    Start,
    Finish,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocusPoint {
    pub log_rate: f64,
    /// Seconds after cooling begins: (T_aus - T) / rate.
    pub time: f64,
    pub temperature: f64,
}

/// One phase boundary as drawable polyline segments, split wherever the
/// phase is absent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseLocus {
    pub phase: Phase,
    pub kind: LocusKind,
    pub segments: Vec<Vec<LocusPoint>>,
}

/// A full synthesized CCT diagram on a log-uniform rate grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CCTDiagram {
    pub composition: Composition,
    pub aust: Austenitization,
    pub predictions: Vec<PhasePrediction>,
    pub loci: Vec<PhaseLocus>,
}

impl CCTDiagram {
    pub fn log_rates(&self) -> Vec<f64> {
        self.predictions.iter().map(|p| p.log_rate).collect()
    }
}

#[derive(Debug, Error)]
pub enum StackError {
    #[error(transparent)]
    Learn(#[from] LearnError),
    #[error(transparent)]
    Net(#[from] NnError),
    #[error(transparent)]
    Data(#[from] ValidationError),
    #[error("bundle is invalid: {0}")]
    BundleInvalid(String),
    #[error("invalid training config: {0}")]
    BadConfig(String),
    #[error("not enough {what} rows: found {found}, need at least {needed}")]
    NotEnoughRows {
        what: String,
        found: usize,
        needed: usize,
    },
    #[error("bad rate grid: {0}")]
    BadRateGrid(String),
    #[error("upstream models must be trained first")]
    ModelsNotTrained,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_wiring_is_acyclic_and_complete() {
        let m = WiringManifest::standard();
        let order = m.training_order().unwrap();
        assert_eq!(order.len(), 14);
        let pos = |id| order.iter().position(|&x| x == id).unwrap();
        assert!(pos(SubModelId::StartF) < pos(SubModelId::StartP));
        assert!(pos(SubModelId::Fractions) < pos(SubModelId::StartB));
        assert!(pos(SubModelId::StartB) < pos(SubModelId::RangeB));
        assert!(pos(SubModelId::StartP) < pos(SubModelId::RangeP));
    }

    #[test]
    fn wiring_declares_the_stated_couplings() {
        let m = WiringManifest::standard();
        let bs = &m.entry(SubModelId::StartB).unwrap().features;
        assert!(bs.contains(&FRAC_F.to_string()) && bs.contains(&FRAC_P.to_string()));
        let rb = &m.entry(SubModelId::RangeB).unwrap().features;
        assert!(rb.contains(&PRED_BS.to_string()));
        let ps = &m.entry(SubModelId::StartP).unwrap().features;
        assert!(ps.contains(&PRED_FS.to_string()));
        for id in [SubModelId::Ac1, SubModelId::Ac3, SubModelId::PresenceF, SubModelId::StartM] {
            assert_eq!(m.entry(id).unwrap().features, base_feature_names());
        }
    }

    #[test]
    fn cyclic_wiring_is_rejected() {
        let mut m = WiringManifest::standard();
        // StartF depending on pred_Ps while StartP depends on pred_Fs is a cycle.
        m.entries
            .iter_mut()
            .find(|e| e.id == SubModelId::StartF)
            .unwrap()
            .features
            .push(PRED_PS.into());
        let err = m.training_order().unwrap_err();
        assert!(matches!(err, StackError::BundleInvalid(msg) if msg.contains("cycle")));
    }

    #[test]
    fn unknown_feature_name_is_rejected() {
        let mut m = WiringManifest::standard();
        m.entries[0].features.push("pred_bogus".into());
        assert!(m.training_order().is_err());
    }

    #[test]
    fn missing_entry_is_rejected() {
        let mut m = WiringManifest::standard();
        m.entries.pop();
        assert!(m.training_order().is_err());
    }

    #[test]
    fn prediction_invariant_checker_flags_breaches() {
        let mut p = PhasePrediction {
            log_rate: 0.0,
            present: [false, false, true, true],
            start: [None, None, Some(500.0), Some(300.0)],
            finish: [None, None, Some(350.0), None],
            fractions: [0.0, 0.0, 0.6, 0.4],
            ac1: 700.0,
            ac3: 800.0,
            override_applied: false,
            clamp_applied: false,
            fs_feature_raw: false,
        };
        assert!(p.invariant_violations().is_empty());
        p.finish[2] = Some(250.0);
        let v = p.invariant_violations();
        assert_eq!(v.len(), 1);
        assert!(v[0].contains("below martensite start"));
        p.fractions = [0.5, 0.0, 0.6, 0.4];
        assert!(p.invariant_violations().len() == 2);
    }
}
