//! Held-out evaluation and literature benchmarking.
//!
//! [`evaluate`] scores a trained bundle against a measured dataset the
//! bundle has never seen: per-phase presence classification, start and
//! range regression, critical temperatures, and phase-fraction error in
//! percentage points. The report carries fingerprints of both the bundle
//! and the dataset plus a train/test diagram-overlap proof, so a quoted
//! score can be tied back to exactly what produced it.

pub mod bench;
pub mod metrics;

pub use bench::{
    read_fixtures, resolve_austenitization, run_benchmark, BenchError, BenchmarkFixture,
    BenchmarkReport, BenchmarkRow, FixtureHeader, ReferenceErrors,
};
pub use metrics::{
    fraction_error_points, score_classification, score_regression, ClassificationScores,
    EvalError, RegressionScores,
};

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::data::{Dataset, Phase};
use crate::stack::{predict_point, ModelBundle, PhasePrediction, StackError};

/// Phase-fraction error on rows whose measured fractions form a complete
/// simplex, in percentage points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FractionErrors {
    pub per_phase: [f64; 4],
    pub mean: f64,
    pub n: usize,
}

/// Evidence that the evaluation set shares no diagrams with the bundle's
/// training set. Any overlap is listed, not hidden.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisjointnessProof {
    pub train_diagrams: usize,
    pub test_diagrams: usize,
    pub overlap: usize,
    pub overlapping_ids: Vec<String>,
}

impl DisjointnessProof {
    pub fn is_disjoint(&self) -> bool {
        self.overlap == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub n_points: usize,
    pub n_diagrams: usize,
    /// Presence classification per phase, F/P/B/M order.
    pub presence: [ClassificationScores; 4],
    /// Start-temperature regression per phase, scored on rows where the
    /// phase is both measured and predicted with a start temperature.
    pub start: [Option<RegressionScores>; 4],
    /// Transformation-range regression for F/P/B (martensite has no
    /// finish in this scheme).
    pub range: [Option<RegressionScores>; 3],
    pub ac1: Option<RegressionScores>,
    pub ac3: Option<RegressionScores>,
    pub fractions: Option<FractionErrors>,
    /// SHA-256 of the serialized bundle.
    pub bundle_fingerprint: String,
    /// SHA-256 of the serialized evaluation rows.
    pub dataset_fingerprint: String,
    pub disjointness: DisjointnessProof,
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn fingerprints(bundle: &ModelBundle, test: &Dataset) -> Result<(String, String), StackError> {
    let bundle_bytes = serde_json::to_vec(bundle)
        .map_err(|e| StackError::BundleInvalid(format!("bundle not serializable: {e}")))?;
    let data_bytes = serde_json::to_vec(test.points())
        .map_err(|e| StackError::BundleInvalid(format!("dataset not serializable: {e}")))?;
    Ok((sha256_hex(&bundle_bytes), sha256_hex(&data_bytes)))
}

fn prove_disjoint(bundle: &ModelBundle, test: &Dataset) -> DisjointnessProof {
    let train: BTreeSet<&str> = bundle.train_diagram_ids.iter().map(|s| s.as_str()).collect();
    let test_ids = test.diagram_ids();
    let overlapping_ids: Vec<String> =
        test_ids.iter().filter(|id| train.contains(**id)).map(|s| s.to_string()).collect();
    DisjointnessProof {
        train_diagrams: train.len(),
        test_diagrams: test_ids.len(),
        overlap: overlapping_ids.len(),
        overlapping_ids,
    }
}

/// Scores `bundle` on the measured rows of `test`.
///
/// Synthetic rows are ignored: they are training scaffolding, and scoring
/// on them would grade the model against its own assumptions. Start and
/// range scores are conditional on correct presence; the presence block
/// accounts for the rows they skip.
pub fn evaluate(bundle: &ModelBundle, test: &Dataset) -> Result<EvalReport, StackError> {
    bundle.validate()?;
    let rows: Vec<_> = test.points().iter().filter(|p| !p.synthetic).collect();
    if rows.is_empty() {
        return Err(StackError::NotEnoughRows {
            what: "measured evaluation".into(),
            found: 0,
            needed: 1,
        });
    }

    let preds: Vec<PhasePrediction> = rows
        .par_iter()
        .map(|p| predict_point(bundle, &p.composition, &p.aust, p.log_rate))
        .collect::<Result<_, _>>()?;

    let presence_of = |k: usize| -> Result<ClassificationScores, StackError> {
        let truth: Vec<bool> = rows.iter().map(|p| p.phases[k].present).collect();
        let pred: Vec<bool> = preds.iter().map(|q| q.present[k]).collect();
        score_classification(&truth, &pred)
            .map_err(|e| StackError::BundleInvalid(format!("presence scoring: {e}")))
    };
    let presence = [presence_of(0)?, presence_of(1)?, presence_of(2)?, presence_of(3)?];

    let paired = |pick: &dyn Fn(&&crate::data::DataPoint, &PhasePrediction) -> Option<(f64, f64)>|
     -> Option<RegressionScores> {
        let (truth, pred): (Vec<f64>, Vec<f64>) =
            rows.iter().zip(&preds).filter_map(|(p, q)| pick(p, q)).unzip();
        score_regression(&truth, &pred).ok()
    };

    let mut start: [Option<RegressionScores>; 4] = [None, None, None, None];
    for k in 0..4 {
        start[k] = paired(&|p, q| match (p.phases[k].start_temp, q.start[k]) {
            (Some(t), Some(s)) => Some((t, s)),
            _ => None,
        });
    }

    let mut range: [Option<RegressionScores>; 3] = [None, None, None];
    for k in 0..3 {
        range[k] = paired(&|p, q| match (p.phases[k].range_temp, q.start[k], q.finish[k]) {
            (Some(t), Some(s), Some(f)) => Some((t, s - f)),
            _ => None,
        });
    }

    let ac1 = paired(&|p, q| p.ac1.map(|t| (t, q.ac1)));
    let ac3 = paired(&|p, q| p.ac3.map(|t| (t, q.ac3)));

    let (frac_truth, frac_pred): (Vec<[f64; 4]>, Vec<[f64; 4]>) = rows
        .iter()
        .zip(&preds)
        .filter_map(|(p, q)| {
            let mut t = [0.0; 4];
            for k in 0..4 {
                t[k] = p.phases[k].fraction?;
            }
            ((t.iter().sum::<f64>() - 1.0).abs() <= 1e-6).then_some((t, q.fractions))
        })
        .unzip();
    let fractions = fraction_error_points(&frac_truth, &frac_pred)
        .ok()
        .map(|(per_phase, mean)| FractionErrors { per_phase, mean, n: frac_truth.len() });

    let (bundle_fingerprint, dataset_fingerprint) = fingerprints(bundle, test)?;

    Ok(EvalReport {
        n_points: rows.len(),
        n_diagrams: test.diagram_ids().len(),
        presence,
        start,
        range,
        ac1,
        ac3,
        fractions,
        bundle_fingerprint,
        dataset_fingerprint,
        disjointness: prove_disjoint(bundle, test),
    })
}

impl EvalReport {
    /// Plain-text summary for terminals and logs.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let push = |out: &mut String, line: String| {
            out.push_str(&line);
            out.push('\n');
        };
        push(&mut out, format!("evaluated {} points across {} diagrams", self.n_points, self.n_diagrams));
        push(&mut out, String::new());
        push(&mut out, "phase presence (F1 / precision / recall):".into());
        for (k, phase) in Phase::ALL.iter().enumerate() {
            let s = &self.presence[k];
            push(
                &mut out,
                format!(
                    "  {:<10} {:.3} / {:.3} / {:.3}   (n={})",
                    phase.name(),
                    s.f1,
                    s.precision,
                    s.recall,
                    s.n
                ),
            );
        }
        push(&mut out, String::new());
        push(&mut out, "start temperature (MAE degC / RMSE / n):".into());
        for (k, phase) in Phase::ALL.iter().enumerate() {
            push(&mut out, format!("  {:<10} {}", phase.name(), render_reg(&self.start[k])));
        }
        push(&mut out, String::new());
        push(&mut out, "transformation range (MAE degC / RMSE / n):".into());
        for (k, phase) in Phase::ALL.iter().take(3).enumerate() {
            push(&mut out, format!("  {:<10} {}", phase.name(), render_reg(&self.range[k])));
        }
        push(&mut out, String::new());
        push(&mut out, format!("  {:<10} {}", "Ac1", render_reg(&self.ac1)));
        push(&mut out, format!("  {:<10} {}", "Ac3", render_reg(&self.ac3)));
        push(&mut out, String::new());
        match &self.fractions {
            Some(f) => {
                push(
                    &mut out,
                    format!(
                        "phase fractions: mean {:.2} pp  (F {:.2}, P {:.2}, B {:.2}, M {:.2}; n={})",
                        f.mean, f.per_phase[0], f.per_phase[1], f.per_phase[2], f.per_phase[3], f.n
                    ),
                );
            }
            None => push(&mut out, "phase fractions: no complete measured rows".into()),
        }
        push(&mut out, String::new());
        let d = &self.disjointness;
        if d.is_disjoint() {
            push(
                &mut out,
                format!(
                    "split check: {} train vs {} test diagrams, no overlap",
                    d.train_diagrams, d.test_diagrams
                ),
            );
        } else {
            push(
                &mut out,
                format!(
                    "split check: WARNING {} of {} test diagrams were seen in training: {}",
                    d.overlap,
                    d.test_diagrams,
                    d.overlapping_ids.join(", ")
                ),
            );
        }
        push(&mut out, format!("bundle  sha256 {}", self.bundle_fingerprint));
        push(&mut out, format!("dataset sha256 {}", self.dataset_fingerprint));
        out
    }
}

fn render_reg(s: &Option<RegressionScores>) -> String {
    match s {
        Some(r) => format!("{:.1} / {:.1} / {}", r.mae, r.rmse, r.n),
        None => "no scorable rows".into(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::split_by_diagram;
    use crate::learners::{HyperParams, LearnerFamily, LearnerSpec, Task};
    use crate::nn::FractionConfig;
    use crate::oracle::{generate_synthetic_dataset, OracleParams};
    use crate::stack::{train_stack, StackConfig};

    fn quick_grid(task: Task) -> Vec<LearnerSpec> {
        vec![LearnerSpec {
            family: LearnerFamily::Knn,
            task,
            hyper: HyperParams { k: 5, ..HyperParams::default() },
            seed: 0,
        }]
    }

    fn quick_config() -> StackConfig {
        StackConfig {
            min_rows: 4,
            classify_grid: quick_grid(Task::Classify),
            regress_grid: quick_grid(Task::Regress),
            fraction_net: FractionConfig { hidden: 8, max_epochs: 40, ..FractionConfig::default() },
            ..StackConfig::seeded(9)
        }
    }

    fn oracle_split() -> (Dataset, Dataset) {
        let params = OracleParams { seed: 4, noise_sigma: 0.0, ..OracleParams::default() };
        let data = generate_synthetic_dataset(&params, 12, 7).unwrap();
        split_by_diagram(&data, 0.25, 5).unwrap()
    }

    #[test]
    fn scores_a_bundle_on_held_out_diagrams() {
        let (train, test) = oracle_split();
        let bundle = train_stack(&train, &quick_config()).unwrap();
        let report = evaluate(&bundle, &test).unwrap();

        assert_eq!(report.n_points, test.len());
        assert_eq!(report.n_diagrams, 3);
        assert!(report.disjointness.is_disjoint());
        for s in &report.presence {
            assert_eq!(s.n, test.len());
        }
        // The oracle corpus always produces martensite rows, so the
        // martensite start model has scorable pairs.
        assert!(report.start[3].is_some());
        let f = report.fractions.as_ref().expect("oracle rows carry complete fractions");
        assert!(f.n > 0);
        assert!(f.mean.is_finite());
        let text = report.render_text();
        assert!(text.contains("no overlap"));
        assert!(text.contains("martensite"));
    }

    #[test]
    fn overlapping_split_is_reported_not_hidden() {
        let (train, _) = oracle_split();
        let bundle = train_stack(&train, &quick_config()).unwrap();
        let report = evaluate(&bundle, &train).unwrap();
        assert_eq!(report.disjointness.overlap, report.disjointness.test_diagrams);
        assert!(!report.disjointness.is_disjoint());
        assert!(report.render_text().contains("WARNING"));
    }

    #[test]
    fn fingerprints_are_deterministic_and_distinct() {
        let (train, test) = oracle_split();
        let bundle = train_stack(&train, &quick_config()).unwrap();
        let a = evaluate(&bundle, &test).unwrap();
        let b = evaluate(&bundle, &test).unwrap();
        assert_eq!(a.bundle_fingerprint, b.bundle_fingerprint);
        assert_eq!(a.dataset_fingerprint, b.dataset_fingerprint);
        assert_ne!(a.bundle_fingerprint, a.dataset_fingerprint);
        let on_train = evaluate(&bundle, &train).unwrap();
        assert_ne!(on_train.dataset_fingerprint, a.dataset_fingerprint);
    }

    #[test]
    fn synthetic_rows_are_excluded_from_scoring() {
        let (train, test) = oracle_split();
        let bundle = train_stack(&train, &quick_config()).unwrap();

        let mut padded = test.points().to_vec();
        let mut ghost = padded[0].clone();
        ghost.synthetic = true;
        ghost.diagram_id = "ghost".into();
        padded.push(ghost);
        let padded = Dataset::new(padded).unwrap();
        let report = evaluate(&bundle, &padded).unwrap();
        assert_eq!(report.n_points, test.len());
    }
}
