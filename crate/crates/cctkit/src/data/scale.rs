//! Column-wise feature scaling.
//!
//! [`StandardScaler`] centers and rescales to unit variance and is the
//! default everywhere. [`QuantileScaler`] maps each column through its
//! empirical CDF onto [0, 1]; it is available as a drop-in alternative
//! for heavy-tailed inputs.

use serde::{Deserialize, Serialize};

use super::ValidationError;
use crate::matrix::Matrix;

/// Per-column standardization: `x -> (x - mean) / std`.
///
/// Constant columns keep their mean and get a divisor of 1, so they map
/// to exactly zero instead of NaN; their indices are recorded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandardScaler {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    pub constant_cols: Vec<usize>,
}

impl StandardScaler {
    /// Fits on the rows of `m` using population standard deviation.
    pub fn fit(m: &Matrix) -> Result<Self, ValidationError> {
        if m.rows() == 0 {
            return Err(ValidationError::EmptyDataset);
        }
        let n = m.rows() as f64;
        let cols = m.cols();
        let mut mean = vec![0.0; cols];
        for row in m.iter_rows() {
            for (s, &v) in mean.iter_mut().zip(row) {
                *s += v;
            }
        }
        for s in mean.iter_mut() {
            *s /= n;
        }
        let mut var = vec![0.0; cols];
        for row in m.iter_rows() {
            for ((s, &mu), &v) in var.iter_mut().zip(&mean).zip(row) {
                let d = v - mu;
                *s += d * d;
            }
        }
        let mut constant_cols = Vec::new();
        let std: Vec<f64> = var
            .iter()
            .enumerate()
            .map(|(c, &s)| {
                let sd = (s / n).sqrt();
                if sd == 0.0 {
                    constant_cols.push(c);
                    1.0
                } else {
                    sd
                }
            })
            .collect();
        Ok(StandardScaler { mean, std, constant_cols })
    }

    /// Builds directly from known column statistics. Zero stds are
    /// replaced by 1 and recorded as constant columns.
    pub fn from_stats(mean: Vec<f64>, std: Vec<f64>) -> Self {
        assert_eq!(mean.len(), std.len(), "stat length mismatch");
        let mut constant_cols = Vec::new();
        let std = std
            .into_iter()
            .enumerate()
            .map(|(c, s)| {
                if s == 0.0 {
                    constant_cols.push(c);
                    1.0
                } else {
                    s
                }
            })
            .collect();
        StandardScaler { mean, std, constant_cols }
    }

    pub fn width(&self) -> usize {
        self.mean.len()
    }

    fn check_width(&self, got: usize) -> Result<(), ValidationError> {
        if got == self.width() {
            Ok(())
        } else {
            Err(ValidationError::WidthMismatch { expected: self.width(), got })
        }
    }

    pub fn transform_row(&self, row: &[f64]) -> Result<Vec<f64>, ValidationError> {
        self.check_width(row.len())?;
        Ok(row
            .iter()
            .zip(&self.mean)
            .zip(&self.std)
            .map(|((&v, &m), &s)| (v - m) / s)
            .collect())
    }

    pub fn transform(&self, m: &Matrix) -> Result<Matrix, ValidationError> {
        self.check_width(m.cols())?;
        let mut out = Matrix::zeros(m.rows(), m.cols());
        for i in 0..m.rows() {
            let scaled = self.transform_row(m.row(i))?;
            out.row_mut(i).copy_from_slice(&scaled);
        }
        Ok(out)
    }

    pub fn inverse_row(&self, row: &[f64]) -> Result<Vec<f64>, ValidationError> {
        self.check_width(row.len())?;
        Ok(row
            .iter()
            .zip(&self.mean)
            .zip(&self.std)
            .map(|((&v, &m), &s)| v * s + m)
            .collect())
    }
}

/// Maps each column onto [0, 1] through linear interpolation of its
/// empirical quantiles. Out-of-range inputs clip to the endpoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantileScaler {
    /// Sorted knot values per column, at most `MAX_KNOTS` each.
    pub knots: Vec<Vec<f64>>,
    pub constant_cols: Vec<usize>,
}

impl QuantileScaler {
    /// Knot budget per column; larger fits subsample evenly spaced
    /// quantiles so memory stays bounded.
    pub const MAX_KNOTS: usize = 1000;

    pub fn fit(m: &Matrix) -> Result<Self, ValidationError> {
        if m.rows() == 0 {
            return Err(ValidationError::EmptyDataset);
        }
        let mut knots = Vec::with_capacity(m.cols());
        let mut constant_cols = Vec::new();
        for c in 0..m.cols() {
            let mut col = m.column(c);
            col.sort_by(|a, b| a.partial_cmp(b).expect("non-finite feature"));
            if col[0] == col[col.len() - 1] {
                constant_cols.push(c);
            }
            if col.len() > Self::MAX_KNOTS {
                col = subsample_quantiles(&col, Self::MAX_KNOTS);
            }
            knots.push(col);
        }
        Ok(QuantileScaler { knots, constant_cols })
    }

    pub fn width(&self) -> usize {
        self.knots.len()
    }

    fn check_width(&self, got: usize) -> Result<(), ValidationError> {
        if got == self.width() {
            Ok(())
        } else {
            Err(ValidationError::WidthMismatch { expected: self.width(), got })
        }
    }

    pub fn transform_row(&self, row: &[f64]) -> Result<Vec<f64>, ValidationError> {
        self.check_width(row.len())?;
        Ok(row
            .iter()
            .enumerate()
            .map(|(c, &v)| transform_one(&self.knots[c], v))
            .collect())
    }

    pub fn transform(&self, m: &Matrix) -> Result<Matrix, ValidationError> {
        self.check_width(m.cols())?;
        let mut out = Matrix::zeros(m.rows(), m.cols());
        for i in 0..m.rows() {
            let t = self.transform_row(m.row(i))?;
            out.row_mut(i).copy_from_slice(&t);
        }
        Ok(out)
    }
}

/// Evenly spaced quantiles of an already sorted sample, endpoints kept.
fn subsample_quantiles(sorted: &[f64], k: usize) -> Vec<f64> {
    let n = sorted.len();
    (0..k)
        .map(|i| {
            let pos = i as f64 * (n - 1) as f64 / (k - 1) as f64;
            let lo = pos.floor() as usize;
            let hi = pos.ceil() as usize;
            if lo == hi {
                sorted[lo]
            } else {
                let frac = pos - lo as f64;
                sorted[lo] + (sorted[hi] - sorted[lo]) * frac
            }
        })
        .collect()
}

fn transform_one(knots: &[f64], v: f64) -> f64 {
    let k = knots.len();
    if k == 1 || knots[0] == knots[k - 1] {
        // Constant column: every input maps to the midpoint.
        return 0.5;
    }
    if v <= knots[0] {
        return 0.0;
    }
    if v >= knots[k - 1] {
        return 1.0;
    }
    let denom = (k - 1) as f64;
    // First knot >= v and first knot > v; for values tied with a run of
    // equal knots the midpoint of the run keeps the map symmetric.
    let lo = knots.partition_point(|&x| x < v);
    let hi = knots.partition_point(|&x| x <= v);
    if lo != hi {
        let mid = (lo + hi - 1) as f64 / 2.0;
        return mid / denom;
    }
    let a = knots[lo - 1];
    let b = knots[lo];
    let frac = (v - a) / (b - a);
    ((lo - 1) as f64 + frac) / denom
}
