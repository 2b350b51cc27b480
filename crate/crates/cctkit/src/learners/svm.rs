//! Linear SVM trained with the Pegasos stochastic subgradient method.
//!
//! The bias rides along as an augmented constant-1 feature. Classification
//! minimizes hinge loss; regression uses the epsilon-insensitive loss on
//! internally standardized targets so the projection radius stays
//! meaningful across target scales.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{LearnerSpec, ModelKind, Task};
use crate::matrix::Matrix;

/// Decision value of an augmented weight vector on an unaugmented row.
pub(crate) fn decision(weights: &[f64], row: &[f64]) -> f64 {
    let bias = weights[weights.len() - 1];
    row.iter().zip(weights).map(|(&x, &w)| x * w).sum::<f64>() + bias
}

fn project(w: &mut [f64], lambda: f64) {
    let norm: f64 = w.iter().map(|v| v * v).sum::<f64>().sqrt();
    let radius = 1.0 / lambda.sqrt();
    if norm > radius {
        let scale = radius / norm;
        for v in w.iter_mut() {
            *v *= scale;
        }
    }
}

pub(crate) fn fit_svm(x: &Matrix, y: &[f64], sw: &[f64], spec: &LearnerSpec) -> ModelKind {
    let n = x.rows();
    let d = x.cols() + 1;
    let lambda = spec.hyper.lambda.max(1e-12);
    let epochs = spec.hyper.svm_epochs.max(1);

    // Standardize regression targets; classification maps {0,1} -> {-1,1}.
    let (y_mean, y_std) = match spec.task {
        Task::Classify => (0.0, 1.0),
        Task::Regress => {
            let mean = y.iter().sum::<f64>() / n as f64;
            let var = y.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
            (mean, if var > 0.0 { var.sqrt() } else { 1.0 })
        }
    };
    let target: Vec<f64> = match spec.task {
        Task::Classify => y.iter().map(|&v| if v > 0.5 { 1.0 } else { -1.0 }).collect(),
        Task::Regress => y.iter().map(|&v| (v - y_mean) / y_std).collect(),
    };

    let mut w = vec![0.0; d];
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut order: Vec<usize> = (0..n).collect();
    let mut t = 0u64;

    // Suffix averaging: the raw iterate keeps hopping around the optimum
    // at step scale 1/(lambda t), so the returned weights average the
    // second half of the trajectory instead.
    let total = (epochs * n) as u64;
    let avg_from = total / 2;
    let mut w_sum = vec![0.0; d];
    let mut averaged = 0u64;

    for _ in 0..epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            t += 1;
            let eta = 1.0 / (lambda * t as f64);
            let row = x.row(i);
            let margin = decision(&w, row);
            let decay = 1.0 - eta * lambda;
            for v in w.iter_mut() {
                *v *= decay;
            }
            match spec.task {
                Task::Classify => {
                    if target[i] * margin < 1.0 {
                        let step = eta * sw[i] * target[i];
                        for (j, &xj) in row.iter().enumerate() {
                            w[j] += step * xj;
                        }
                        w[d - 1] += step;
                    }
                }
                Task::Regress => {
                    let r = target[i] - margin;
                    if r.abs() > spec.hyper.svm_epsilon {
                        let step = eta * sw[i] * r.signum();
                        for (j, &xj) in row.iter().enumerate() {
                            w[j] += step * xj;
                        }
                        w[d - 1] += step;
                    }
                }
            }
            project(&mut w, lambda);
            if t > avg_from {
                for (s, v) in w_sum.iter_mut().zip(&w) {
                    *s += v;
                }
                averaged += 1;
            }
        }
    }
    if averaged > 0 {
        for v in w_sum.iter_mut() {
            *v /= averaged as f64;
        }
        w = w_sum;
    }
    ModelKind::Svm { weights: w, y_mean, y_std }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learners::{fit, LearnerFamily};
    use rand::Rng;

    #[test]
    fn separates_two_clouds() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for _ in 0..60 {
            let cls = rng.random_range(0..2);
            let cx = if cls == 1 { 2.0 } else { -2.0 };
            rows.push(vec![cx + rng.random_range(-0.8..0.8), rng.random_range(-1.0..1.0)]);
            y.push(cls as f64);
        }
        let x = Matrix::from_rows(&rows);
        let mut spec = LearnerSpec::new(LearnerFamily::Svm, Task::Classify);
        spec.hyper.lambda = 1e-3;
        spec.hyper.svm_epochs = 20;
        let m = fit(&x, &y, None, &spec).unwrap();
        let labels = m.predict_labels(&x).unwrap();
        let correct = labels.iter().zip(&y).filter(|(&l, &t)| l == (t == 1.0)).count();
        assert!(correct >= 58, "{correct}/60");
    }

    #[test]
    fn learns_a_biased_line() {
        // y = 3x + 10: the augmented bias must do real work here.
        let x = Matrix::from_rows(&(0..40).map(|i| vec![i as f64 / 10.0]).collect::<Vec<_>>());
        let y: Vec<f64> = (0..40).map(|i| 3.0 * i as f64 / 10.0 + 10.0).collect();
        let mut spec = LearnerSpec::new(LearnerFamily::Svm, Task::Regress);
        spec.hyper.lambda = 1e-4;
        spec.hyper.svm_epochs = 300;
        spec.hyper.svm_epsilon = 0.01;
        let m = fit(&x, &y, None, &spec).unwrap();
        let pred = m.predict(&x).unwrap();
        let mae: f64 =
            pred.iter().zip(&y).map(|(p, t)| (p - t).abs()).sum::<f64>() / y.len() as f64;
        assert!(mae < 0.6, "mae {mae}");
    }

    #[test]
    fn training_is_deterministic_per_seed() {
        let x = Matrix::from_rows(&[vec![0.0], vec![1.0], vec![2.0], vec![3.0]]);
        let y = vec![0.0, 0.0, 1.0, 1.0];
        let spec = LearnerSpec::new(LearnerFamily::Svm, Task::Classify);
        let a = fit(&x, &y, None, &spec).unwrap();
        let b = fit(&x, &y, None, &spec).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn weight_norm_respects_projection_radius() {
        let x = Matrix::from_rows(&[vec![100.0], vec![-100.0], vec![90.0], vec![-90.0]]);
        let y = vec![1.0, 0.0, 1.0, 0.0];
        let mut spec = LearnerSpec::new(LearnerFamily::Svm, Task::Classify);
        spec.hyper.lambda = 0.01;
        let m = fit(&x, &y, None, &spec).unwrap();
        let ModelKind::Svm { weights, .. } = &m.kind else { panic!() };
        let norm: f64 = weights.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(norm <= 1.0 / 0.01f64.sqrt() + 1e-9, "norm {norm}");
    }
}
