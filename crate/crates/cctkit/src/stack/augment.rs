//! Physics-motivated training-data injection.
//!
//! Two rules add synthetic rows before sub-model training. Rule one
//! interpolates phase presence between consecutive cooling rates that
//! both show the phase: presence is a connected interval in rate, so the
//! gap interior is positive too. Rule two appends one near-equilibrium
//! row per alloy whose ferrite and pearlite start targets are the
//! predicted Ac3 and Ac1, tying the start regressors to their
//! equilibrium limits. Injected rows are marked `synthetic` and carry
//! only the labels the rule justifies; they never overwrite measured
//! rows and never contribute to feature statistics.

use std::collections::HashMap;

use crate::data::{DataPoint, Dataset, PhaseRecord, ValidationError};
use crate::stack::{StackError, SubModel};

/// Indices of `points` grouped by diagram in first-appearance order,
/// each group sorted by log rate (ties keep input order).
fn diagram_groups(points: &[DataPoint]) -> Vec<Vec<usize>> {
    let mut order: Vec<&str> = Vec::new();
    let mut groups: HashMap<&str, Vec<usize>> = HashMap::new();
    for (i, p) in points.iter().enumerate() {
        let entry = groups.entry(p.diagram_id.as_str()).or_insert_with(|| {
            order.push(p.diagram_id.as_str());
            Vec::new()
        });
        entry.push(i);
    }
    let mut out: Vec<Vec<usize>> = order.into_iter().map(|id| groups.remove(id).unwrap()).collect();
    for g in &mut out {
        g.sort_by(|&a, &b| {
            points[a]
                .log_rate
                .partial_cmp(&points[b].log_rate)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.cmp(&b))
        });
    }
    out
}

/// Inserts `points_per_gap` synthetic presence-positive rows strictly
/// inside every gap between consecutive rates where a phase is present
/// in both endpoints. The injected rows carry presence for the
/// generating phase only and no regression targets; observed negatives
/// are never touched.
pub fn augment_presence(
    train: &Dataset,
    points_per_gap: usize,
) -> Result<Dataset, ValidationError> {
    let mut points = train.points().to_vec();
    if points_per_gap == 0 {
        return Dataset::new(points);
    }
    let mut injected = Vec::new();
    for group in diagram_groups(train.points()) {
        for phase in 0..4 {
            for pair in group.windows(2) {
                let (a, b) = (&train.points()[pair[0]], &train.points()[pair[1]]);
                if !(a.phases[phase].present && b.phases[phase].present) {
                    continue;
                }
                if !(a.log_rate < b.log_rate) {
                    continue;
                }
                for j in 1..=points_per_gap {
                    let t = j as f64 / (points_per_gap + 1) as f64;
                    let log_rate = a.log_rate + (b.log_rate - a.log_rate) * t;
                    let mut phases = [PhaseRecord::absent(); 4];
                    phases[phase] = PhaseRecord {
                        present: true,
                        start_temp: None,
                        range_temp: None,
                        fraction: None,
                    };
                    injected.push(DataPoint {
                        diagram_id: a.diagram_id.clone(),
                        composition: a.composition,
                        aust: a.aust,
                        log_rate,
                        phases,
                        ac1: None,
                        ac3: None,
                        synthetic: true,
                    });
                }
            }
        }
    }
    points.extend(injected);
    Dataset::new(points)
}

/// Appends one synthetic row per diagram at `log_rate_anchor` whose
/// ferrite start target is the trained Ac3 model's prediction and whose
/// pearlite start target is the Ac1 prediction. The anchored rows teach
/// the start regressors their near-equilibrium limits.
pub fn anchor_equilibrium(
    train: &Dataset,
    ac1_model: &SubModel,
    ac3_model: &SubModel,
    log_rate_anchor: f64,
) -> Result<Dataset, StackError> {
    let mut points = train.points().to_vec();
    let mut injected = Vec::new();
    for group in diagram_groups(train.points()) {
        let src = &train.points()[group[0]];
        let mut anchor = DataPoint {
            diagram_id: src.diagram_id.clone(),
            composition: src.composition,
            aust: src.aust,
            log_rate: log_rate_anchor,
            phases: [PhaseRecord::absent(); 4],
            ac1: None,
            ac3: None,
            synthetic: true,
        };
        let features = anchor.features();
        let pred_ac3 = ac3_model.predict_one(&features)?;
        let pred_ac1 = ac1_model.predict_one(&features)?;
        anchor.phases[0] = PhaseRecord {
            present: true,
            start_temp: Some(pred_ac3),
            range_temp: None,
            fraction: None,
        };
        anchor.phases[1] = PhaseRecord {
            present: true,
            start_temp: Some(pred_ac1),
            range_temp: None,
            fraction: None,
        };
        injected.push(anchor);
    }
    points.extend(injected);
    Ok(Dataset::new(points)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{Austenitization, Composition, Element, StandardScaler, FEATURE_NAMES};
    use crate::learners::{FittedModel, LearnerSpec, LearnerFamily, Task};
    use crate::matrix::Matrix;
    use crate::stack::{base_feature_names, SubModelId};

    fn point(diagram: &str, log_rate: f64, present: [bool; 4]) -> DataPoint {
        let mut phases = [PhaseRecord::absent(); 4];
        for (k, &p) in present.iter().enumerate() {
            if p {
                phases[k] = PhaseRecord {
                    present: true,
                    start_temp: Some(600.0 - 10.0 * k as f64),
                    range_temp: None,
                    fraction: None,
                };
            } else {
                phases[k].fraction = Some(0.0);
            }
        }
        DataPoint {
            diagram_id: diagram.into(),
            composition: Composition::from_pairs(&[(Element::C, 0.3)]),
            aust: Austenitization { temperature: 1000.0, time: 600.0, time_imputed: false },
            log_rate,
            phases,
            ac1: Some(700.0),
            ac3: Some(800.0),
            synthetic: false,
        }
    }

    fn constant_submodel(id: SubModelId, value: f64) -> SubModel {
        let spec = LearnerSpec::new(LearnerFamily::Knn, Task::Regress);
        let n = FEATURE_NAMES.len();
        SubModel {
            id,
            features: base_feature_names(),
            scaler: StandardScaler::fit(&Matrix::from_rows(&[vec![0.0; n], vec![1.0; n]])).unwrap(),
            model: FittedModel::constant(spec, value, n),
            cv: None,
        }
    }

    #[test]
    fn inserts_points_uniformly_inside_positive_gaps() {
        let ds = Dataset::new(vec![
            point("d1", 0.0, [true, false, false, false]),
            point("d1", 1.0, [true, false, false, false]),
        ])
        .unwrap();
        let out = augment_presence(&ds, 3).unwrap();
        let synth: Vec<&DataPoint> = out.points().iter().filter(|p| p.synthetic).collect();
        assert_eq!(synth.len(), 3);
        let rates: Vec<f64> = synth.iter().map(|p| p.log_rate).collect();
        assert_eq!(rates, vec![0.25, 0.5, 0.75]);
        for p in synth {
            assert!(p.phases[0].present);
            assert!(p.phases[0].start_temp.is_none() && p.phases[0].fraction.is_none());
            assert!(!p.phases[1].present && !p.phases[2].present && !p.phases[3].present);
        }
    }

    #[test]
    fn mixed_presence_pairs_inject_nothing() {
        let ds = Dataset::new(vec![
            point("d1", 0.0, [true, false, false, false]),
            point("d1", 1.0, [false, false, false, true]),
        ])
        .unwrap();
        let out = augment_presence(&ds, 5).unwrap();
        assert_eq!(out.len(), 2);
    }

    #[test]
    fn zero_points_per_gap_is_identity() {
        let ds = Dataset::new(vec![
            point("d1", 0.0, [true, true, false, false]),
            point("d1", 1.0, [true, true, false, false]),
        ])
        .unwrap();
        let out = augment_presence(&ds, 0).unwrap();
        assert_eq!(out.points(), ds.points());
    }

    #[test]
    fn gaps_are_per_phase_and_per_diagram() {
        // d1 has F positive over two gaps and P over one; d2 has none.
        let ds = Dataset::new(vec![
            point("d1", 0.0, [true, true, false, false]),
            point("d1", 1.0, [true, true, false, false]),
            point("d1", 2.0, [true, false, false, false]),
            point("d2", 0.0, [false, false, true, false]),
            point("d2", 1.0, [false, false, false, true]),
        ])
        .unwrap();
        let out = augment_presence(&ds, 1).unwrap();
        let synth: Vec<&DataPoint> = out.points().iter().filter(|p| p.synthetic).collect();
        assert_eq!(synth.len(), 3);
        assert!(synth.iter().all(|p| p.diagram_id == "d1"));
        assert_eq!(synth.iter().filter(|p| p.phases[0].present).count(), 2);
        assert_eq!(synth.iter().filter(|p| p.phases[1].present).count(), 1);
    }

    #[test]
    fn unsorted_input_rates_are_paired_in_rate_order() {
        let ds = Dataset::new(vec![
            point("d1", 2.0, [true, false, false, false]),
            point("d1", 0.0, [true, false, false, false]),
            point("d1", 1.0, [false, false, false, false]),
        ])
        .unwrap();
        // In rate order presence is (+, -, +): no adjacent positive pair.
        let out = augment_presence(&ds, 2).unwrap();
        assert_eq!(out.len(), 3);
    }

    #[test]
    fn anchors_tie_starts_to_predicted_critical_temps() {
        let ds = Dataset::new(vec![
            point("d1", 0.0, [true, false, false, false]),
            point("d2", 1.0, [false, true, false, false]),
        ])
        .unwrap();
        let ac1 = constant_submodel(SubModelId::Ac1, 710.0);
        let ac3 = constant_submodel(SubModelId::Ac3, 820.0);
        let out = anchor_equilibrium(&ds, &ac1, &ac3, -4.0).unwrap();
        let anchors: Vec<&DataPoint> = out.points().iter().filter(|p| p.synthetic).collect();
        assert_eq!(anchors.len(), 2);
        for a in anchors {
            assert_eq!(a.log_rate, -4.0);
            assert_eq!(a.phases[0].start_temp, Some(820.0));
            assert_eq!(a.phases[1].start_temp, Some(710.0));
            assert!(a.phases[0].present && a.phases[1].present);
            assert!(a.phases[0].start_temp >= a.phases[1].start_temp);
            assert!(a.phases[2].fraction.is_none());
        }
    }

    #[test]
    fn synthetic_rows_leave_feature_stats_unchanged() {
        let ds = Dataset::new(vec![
            point("d1", 0.0, [true, false, false, false]),
            point("d1", 1.0, [true, false, false, false]),
        ])
        .unwrap();
        let out = augment_presence(&ds, 4).unwrap();
        assert_eq!(out.feature_stats(), ds.feature_stats());
    }
}
