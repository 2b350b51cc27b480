//! Dataset quality screening.
//!
//! A small autoencoder is trained on a per-point feature vector; points
//! whose reconstruction error lands in the top ranks are likely
//! digitization mistakes and are reported for removal. The screen is
//! advisory: it flags, the caller decides what to drop.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{Dataset, Element, StandardScaler, ValidationError};
use crate::matrix::Matrix;
use crate::nn::{Autoencoder, AutoencoderConfig, NnError};

#[derive(Debug, Error)]
pub enum ScreenError {
    #[error("cannot flag {count} outliers out of {rows} rows")]
    CountTooLarge { count: usize, rows: usize },
    #[error(transparent)]
    Nn(#[from] NnError),
    #[error(transparent)]
    Validation(#[from] ValidationError),
}

/// One column of the screening feature vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScreenFeature {
    Element(Element),
    AustTemp,
    AustTime,
    LogRate,
    /// Highest recorded start temperature: the first transformation met
    /// on cooling. Missing values are imputed with the column mean.
    FirstStartTemp,
    /// Sum of recorded phase fractions; complete rows sit near 1.
    FractionSum,
}

/// Default 11-feature screen: major alloying elements, austenitization,
/// cooling rate, first start temperature and the fraction sum.
pub fn default_screen_features() -> Vec<ScreenFeature> {
    vec![
        ScreenFeature::Element(Element::C),
        ScreenFeature::Element(Element::Mn),
        ScreenFeature::Element(Element::Si),
        ScreenFeature::Element(Element::Cr),
        ScreenFeature::Element(Element::Mo),
        ScreenFeature::Element(Element::Ni),
        ScreenFeature::AustTemp,
        ScreenFeature::AustTime,
        ScreenFeature::LogRate,
        ScreenFeature::FirstStartTemp,
        ScreenFeature::FractionSum,
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreenConfig {
    pub features: Vec<ScreenFeature>,
    pub seed: u64,
    pub stop_tol: f64,
    pub max_epochs: usize,
}

impl Default for ScreenConfig {
    fn default() -> Self {
        ScreenConfig {
            features: default_screen_features(),
            seed: 0,
            stop_tol: 1e-3,
            max_epochs: 5000,
        }
    }
}

#[derive(Debug)]
pub struct ScreenReport {
    /// Per-point mean squared reconstruction error, dataset order.
    pub errors: Vec<f64>,
    /// Flagged point indices, ascending.
    pub flagged: Vec<usize>,
    /// Count of imputed feature cells.
    pub imputed: usize,
    pub scaler: StandardScaler,
    pub net: Autoencoder,
}

/// Extracts the screening features of every point. Missing cells (no
/// start temperature anywhere, no fractions) are imputed with the column
/// mean over observed cells; the imputed-cell count is returned.
pub fn screen_matrix(dataset: &Dataset, features: &[ScreenFeature]) -> (Matrix, usize) {
    let n = dataset.len();
    let mut m = Matrix::zeros(n, features.len());
    let mut missing: Vec<(usize, usize)> = Vec::new();
    let mut col_sum = vec![0.0; features.len()];
    let mut col_cnt = vec![0usize; features.len()];

    for (r, p) in dataset.points().iter().enumerate() {
        for (c, f) in features.iter().enumerate() {
            let value = match f {
                ScreenFeature::Element(e) => Some(p.composition.get(*e)),
                ScreenFeature::AustTemp => Some(p.aust.temperature),
                ScreenFeature::AustTime => Some(p.aust.time),
                ScreenFeature::LogRate => Some(p.log_rate),
                ScreenFeature::FirstStartTemp => p
                    .phases
                    .iter()
                    .filter_map(|ph| ph.start_temp)
                    .fold(None, |acc: Option<f64>, s| Some(acc.map_or(s, |a| a.max(s)))),
                ScreenFeature::FractionSum => {
                    let fs: Vec<f64> = p.phases.iter().filter_map(|ph| ph.fraction).collect();
                    if fs.is_empty() {
                        None
                    } else {
                        Some(fs.iter().sum())
                    }
                }
            };
            match value {
                Some(v) => {
                    m.set(r, c, v);
                    col_sum[c] += v;
                    col_cnt[c] += 1;
                }
                None => missing.push((r, c)),
            }
        }
    }
    for &(r, c) in &missing {
        let mean = if col_cnt[c] > 0 { col_sum[c] / col_cnt[c] as f64 } else { 0.0 };
        m.set(r, c, mean);
    }
    (m, missing.len())
}

/// Ranks by reconstruction error, largest first with ties broken toward
/// the lower index, and returns the top `count` indices sorted ascending.
pub fn flag_outliers(errors: &[f64], count: usize) -> Result<Vec<usize>, ScreenError> {
    if count > errors.len() {
        return Err(ScreenError::CountTooLarge { count, rows: errors.len() });
    }
    let mut order: Vec<usize> = (0..errors.len()).collect();
    order.sort_by(|&a, &b| {
        errors[b].partial_cmp(&errors[a]).expect("non-finite reconstruction error").then(a.cmp(&b))
    });
    let mut flagged = order[..count].to_vec();
    flagged.sort_unstable();
    Ok(flagged)
}

/// Full screening pass: extract features, standardize, train the
/// autoencoder, rank reconstruction errors and flag the worst `count`.
pub fn screen_dataset(
    dataset: &Dataset,
    count: usize,
    config: &ScreenConfig,
) -> Result<ScreenReport, ScreenError> {
    if count > dataset.len() {
        return Err(ScreenError::CountTooLarge { count, rows: dataset.len() });
    }
    let (raw, imputed) = screen_matrix(dataset, &config.features);
    let scaler = StandardScaler::fit(&raw)?;
    let scaled = scaler.transform(&raw)?;
    let net_config = AutoencoderConfig {
        seed: config.seed,
        stop_tol: config.stop_tol,
        max_epochs: config.max_epochs,
        ..AutoencoderConfig::for_width(config.features.len())
    };
    let net = Autoencoder::train(&scaled, &net_config)?;
    let errors = net.reconstruction_errors(&scaled)?;
    let flagged = flag_outliers(&errors, count)?;
    Ok(ScreenReport { errors, flagged, imputed, scaler, net })
}

/// Drops the given point indices from a dataset.
pub fn drop_points(dataset: &Dataset, drop: &[usize]) -> Result<Dataset, ValidationError> {
    let drop: std::collections::HashSet<usize> = drop.iter().copied().collect();
    let kept: Vec<_> = dataset
        .points()
        .iter()
        .enumerate()
        .filter(|(i, _)| !drop.contains(i))
        .map(|(_, p)| p.clone())
        .collect();
    Dataset::new(kept)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{Austenitization, Composition, DataPoint, PhaseRecord};

    fn manifold_point(t: f64, diagram: &str) -> DataPoint {
        // All features move together along one line, so the bottleneck
        // can represent clean rows exactly.
        let mut phases = [PhaseRecord::absent(); 4];
        phases[0] = PhaseRecord {
            present: true,
            start_temp: Some(700.0 + 60.0 * t),
            range_temp: Some(40.0),
            fraction: Some(0.5),
        };
        phases[3] = PhaseRecord {
            present: true,
            start_temp: Some(350.0 + 20.0 * t),
            fraction: Some(0.5),
            ..Default::default()
        };
        DataPoint {
            diagram_id: diagram.to_string(),
            composition: Composition::from_pairs(&[
                (Element::C, 0.3 + 0.2 * t),
                (Element::Mn, 1.0 + 0.5 * t),
                (Element::Si, 0.2 + 0.1 * t),
                (Element::Cr, 0.8 - 0.3 * t),
                (Element::Mo, 0.2 + 0.1 * t),
                (Element::Ni, 0.5 + 0.2 * t),
            ]),
            aust: Austenitization { temperature: 880.0 + 40.0 * t, time: 1800.0, time_imputed: false },
            log_rate: t,
            phases,
            ac1: None,
            ac3: None,
            synthetic: false,
        }
    }

    fn manifold_dataset(n: usize) -> Dataset {
        let pts: Vec<DataPoint> = (0..n)
            .map(|i| manifold_point(-1.0 + 2.0 * i as f64 / (n - 1) as f64, &format!("d{i}")))
            .collect();
        Dataset::new(pts).unwrap()
    }

    #[test]
    fn default_screen_has_eleven_features() {
        assert_eq!(default_screen_features().len(), 11);
    }

    #[test]
    fn matrix_imputes_missing_cells_with_column_mean() {
        let mut points: Vec<DataPoint> =
            (0..4).map(|i| manifold_point(i as f64 / 3.0, &format!("d{i}"))).collect();
        for ph in points[2].phases.iter_mut() {
            ph.start_temp = None;
            ph.fraction = None;
        }
        let ds = Dataset::new(points).unwrap();
        let (m, imputed) = screen_matrix(&ds, &default_screen_features());
        assert_eq!(imputed, 2);
        let observed_mean = (m.get(0, 9) + m.get(1, 9) + m.get(3, 9)) / 3.0;
        assert!((m.get(2, 9) - observed_mean).abs() < 1e-12);
        assert!(m.as_slice().iter().all(|v| v.is_finite()));
    }

    #[test]
    fn flag_outliers_ranks_by_error_then_index() {
        let errors = [0.3, 0.9, 0.9, 0.1, 0.5];
        assert_eq!(flag_outliers(&errors, 3).unwrap(), vec![1, 2, 4]);
        // Tie at 0.9: index 1 outranks index 2.
        assert_eq!(flag_outliers(&errors, 1).unwrap(), vec![1]);
        assert_eq!(flag_outliers(&errors, 0).unwrap(), Vec::<usize>::new());
        assert!(matches!(
            flag_outliers(&errors, 6),
            Err(ScreenError::CountTooLarge { count: 6, rows: 5 })
        ));
    }

    #[test]
    fn flag_outliers_matches_full_sort_oracle() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let errors: Vec<f64> = (0..300).map(|_| (rng.random_range(0..40) as f64) / 10.0).collect();
        for count in [1, 5, 50, 300] {
            let got = flag_outliers(&errors, count).unwrap();
            let mut oracle: Vec<usize> = (0..errors.len()).collect();
            oracle.sort_by(|&a, &b| {
                errors[b].partial_cmp(&errors[a]).unwrap().then(a.cmp(&b))
            });
            let mut expect = oracle[..count].to_vec();
            expect.sort_unstable();
            assert_eq!(got, expect, "count {count}");
        }
    }

    #[test]
    fn planted_outlier_is_flagged_first() {
        let mut points: Vec<DataPoint> =
            (0..40).map(|i| manifold_point(-1.0 + 2.0 * i as f64 / 39.0, &format!("d{i}"))).collect();
        // Corrupt one row off the manifold: impossible start temperature
        // and a fraction sum far above 1 are classic digitization faults.
        let bad = 17;
        points[bad].phases[0].start_temp = Some(80.0);
        points[bad].phases[0].fraction = Some(0.9);
        points[bad].phases[3].fraction = Some(0.9);
        points[bad].log_rate = 2.5;
        let ds = Dataset::new(points).unwrap();

        let cfg = ScreenConfig { max_epochs: 1500, stop_tol: 1e-7, ..Default::default() };
        let report = screen_dataset(&ds, 1, &cfg).unwrap();
        assert_eq!(report.flagged, vec![bad]);
        assert_eq!(report.errors.len(), 40);

        let cleaned = drop_points(&ds, &report.flagged).unwrap();
        assert_eq!(cleaned.len(), 39);
        assert!(cleaned.points().iter().all(|p| p.log_rate < 2.0));
    }

    #[test]
    fn screening_is_deterministic() {
        let ds = manifold_dataset(25);
        let cfg = ScreenConfig { max_epochs: 200, ..Default::default() };
        let a = screen_dataset(&ds, 3, &cfg).unwrap();
        let b = screen_dataset(&ds, 3, &cfg).unwrap();
        assert_eq!(a.errors, b.errors);
        assert_eq!(a.flagged, b.flagged);
    }
}
