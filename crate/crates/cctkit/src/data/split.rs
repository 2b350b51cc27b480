//! Diagram-grouped splitting.
//!
//! All points of one diagram describe the same physical measurement, so
//! letting them straddle a split would leak near-duplicates into the test
//! side. Splits and folds therefore operate on whole diagrams.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Dataset, ValidationError};

/// Splits into (train, test) by whole diagrams.
///
/// Diagrams are shuffled with a seeded generator and moved into the test
/// side until it holds at least `test_frac` of the points. Both sides are
/// guaranteed non-empty. The same seed always yields the same split.
pub fn split_by_diagram(
    dataset: &Dataset,
    test_frac: f64,
    seed: u64,
) -> Result<(Dataset, Dataset), ValidationError> {
    if !(test_frac > 0.0 && test_frac < 1.0) {
        return Err(ValidationError::BadSplitFraction(test_frac));
    }
    let mut ids: Vec<&str> = dataset.diagram_ids();
    if ids.len() < 2 {
        return Err(ValidationError::TooFewDiagrams { found: ids.len(), needed: 2 });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ids.shuffle(&mut rng);

    let mut count_of = std::collections::HashMap::new();
    for p in dataset.points() {
        *count_of.entry(p.diagram_id.as_str()).or_insert(0usize) += 1;
    }

    let target = test_frac * dataset.len() as f64;
    let mut test_ids = std::collections::HashSet::new();
    let mut in_test = 0usize;
    for id in &ids {
        if (in_test as f64) >= target || test_ids.len() + 1 == ids.len() {
            break;
        }
        test_ids.insert(*id);
        in_test += count_of[id];
    }

    let (mut train, mut test) = (Vec::new(), Vec::new());
    for p in dataset.points() {
        if test_ids.contains(p.diagram_id.as_str()) {
            test.push(p.clone());
        } else {
            train.push(p.clone());
        }
    }
    Ok((Dataset::new(train)?, Dataset::new(test)?))
}

/// Assigns each row a fold index in `0..folds`, grouping by diagram id.
///
/// Diagrams are shuffled with a seeded generator and dealt round-robin,
/// which keeps fold point-counts roughly level. Errors when there are
/// fewer distinct diagrams than folds.
pub fn assign_diagram_folds(
    diagram_ids: &[&str],
    folds: usize,
    seed: u64,
) -> Result<Vec<usize>, ValidationError> {
    assert!(folds >= 2, "need at least two folds");
    let mut distinct = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for &id in diagram_ids {
        if seen.insert(id) {
            distinct.push(id);
        }
    }
    if distinct.len() < folds {
        return Err(ValidationError::TooFewDiagrams { found: distinct.len(), needed: folds });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    distinct.shuffle(&mut rng);
    let fold_of: std::collections::HashMap<&str, usize> =
        distinct.iter().enumerate().map(|(i, &id)| (id, i % folds)).collect();
    Ok(diagram_ids.iter().map(|id| fold_of[id]).collect())
}
