//! Brute-force k-nearest neighbours over squared Euclidean distance.
//! Distance ties resolve toward the lower training index so predictions
//! are order-independent and reproducible.

use crate::matrix::Matrix;

pub(crate) fn knn_predict(x: &Matrix, y: &[f64], w: &[f64], row: &[f64], k: usize) -> f64 {
    let k = k.clamp(1, y.len());
    let mut dist: Vec<(f64, usize)> = x
        .iter_rows()
        .enumerate()
        .map(|(i, r)| {
            let d: f64 = r.iter().zip(row).map(|(a, b)| (a - b) * (a - b)).sum();
            (d, i)
        })
        .collect();
    dist.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("non-finite distance").then(a.1.cmp(&b.1)));

    let mut num = 0.0;
    let mut den = 0.0;
    for &(_, i) in dist.iter().take(k) {
        num += w[i] * y[i];
        den += w[i];
    }
    if den > 0.0 {
        num / den
    } else {
        // All chosen neighbours carry zero weight; fall back to the
        // unweighted mean.
        dist.iter().take(k).map(|&(_, i)| y[i]).sum::<f64>() / k as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learners::{fit, LearnerFamily, LearnerSpec, Task};

    #[test]
    fn k1_memorizes_training_points_exactly() {
        let x = Matrix::from_rows(&[vec![0.0, 0.0], vec![1.0, 0.5], vec![-2.0, 3.0], vec![4.0, 4.0]]);
        let y = vec![10.0, -3.0, 7.5, 0.25];
        let mut spec = LearnerSpec::new(LearnerFamily::Knn, Task::Regress);
        spec.hyper.k = 1;
        let m = fit(&x, &y, None, &spec).unwrap();
        assert_eq!(m.predict(&x).unwrap(), y);
    }

    #[test]
    fn distance_tie_prefers_lower_index() {
        // Training points at -1 and +1 are equidistant from the origin.
        let x = Matrix::from_rows(&[vec![-1.0], vec![1.0]]);
        let y = [5.0, 9.0];
        let w = [1.0, 1.0];
        assert_eq!(knn_predict(&x, &y, &w, &[0.0], 1), 5.0);
    }

    #[test]
    fn k_larger_than_training_set_clamps() {
        let x = Matrix::from_rows(&[vec![0.0], vec![1.0], vec![2.0]]);
        let y = [0.0, 3.0, 6.0];
        let w = [1.0; 3];
        assert_eq!(knn_predict(&x, &y, &w, &[1.0], 100), 3.0);
    }

    #[test]
    fn neighbours_average_with_sample_weights() {
        let x = Matrix::from_rows(&[vec![0.0], vec![0.1], vec![9.0]]);
        let y = [0.0, 1.0, 100.0];
        let w = [3.0, 1.0, 1.0];
        // Two nearest are rows 0 and 1; weighted mean = (3*0 + 1*1)/4.
        assert_eq!(knn_predict(&x, &y, &w, &[0.0], 2), 0.25);
    }

    #[test]
    fn zero_weight_neighbourhood_falls_back_to_plain_mean() {
        let x = Matrix::from_rows(&[vec![0.0], vec![0.1], vec![9.0]]);
        let y = [2.0, 4.0, 100.0];
        let w = [0.0, 0.0, 1.0];
        assert_eq!(knn_predict(&x, &y, &w, &[0.0], 2), 3.0);
    }

    #[test]
    fn classification_scores_are_neighbour_label_means() {
        let x = Matrix::from_rows(&[vec![0.0], vec![0.2], vec![0.4], vec![10.0]]);
        let y = vec![1.0, 1.0, 0.0, 0.0];
        let mut spec = LearnerSpec::new(LearnerFamily::Knn, Task::Classify);
        spec.hyper.k = 3;
        let m = fit(&x, &y, None, &spec).unwrap();
        let probe = Matrix::from_rows(&[vec![0.1]]);
        let score = m.predict(&probe).unwrap()[0];
        assert!((score - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(m.predict_labels(&probe).unwrap(), vec![true]);
    }
}
