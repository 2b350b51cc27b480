//! Softmax network for final phase fractions.
//!
//! One relu6 hidden layer with bias feeds a four-unit linear layer with
//! no bias; softmax turns the logits into a point on the simplex, so the
//! four predicted fractions always sum to one. Trained with Adam on
//! shuffled mini-batches, early-stopped on a held-out validation slice.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::adam::{AdamParams, AdamState};
use super::autoencoder::NnError;
use super::xavier_uniform;
use crate::matrix::Matrix;

pub const N_PHASES: usize = 4;

/// relu6: linear on (0, 6), clipped outside.
pub fn relu6(x: f64) -> f64 {
    x.clamp(0.0, 6.0)
}

/// Numerically safe softmax (max subtraction before exponentiation).
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&z| (z - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.iter().map(|&e| e / sum).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FractionLoss {
    /// Categorical cross-entropy; the gradient at the logits is p - t.
    CrossEntropy,
    /// Mean squared error on the softmax outputs.
    SquaredError,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FractionConfig {
    pub hidden: usize,
    pub seed: u64,
    pub max_epochs: usize,
    /// Consecutive epochs without validation improvement before stopping.
    pub patience: usize,
    pub batch_size: usize,
    pub val_frac: f64,
    pub loss: FractionLoss,
    pub adam: AdamParams,
}

impl Default for FractionConfig {
    fn default() -> Self {
        FractionConfig {
            hidden: 100,
            seed: 0,
            max_epochs: 500,
            patience: 3,
            batch_size: 32,
            val_frac: 0.1,
            loss: FractionLoss::CrossEntropy,
            adam: AdamParams::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StopReason {
    Patience,
    MaxEpochs,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingLog {
    pub train_loss: Vec<f64>,
    pub val_loss: Vec<f64>,
    pub stop_epoch: usize,
    /// Epoch whose parameters were kept (1-based; 0 means initial).
    pub best_epoch: usize,
    pub stop_reason: StopReason,
    pub val_rows: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FractionNet {
    n_inputs: usize,
    hidden: usize,
    /// Layout: W1 (in x hidden), b1 (hidden), W2 (hidden x 4). The output
    /// layer carries no bias.
    params: Vec<f64>,
    pub loss: FractionLoss,
}

impl FractionNet {
    fn init(n_inputs: usize, config: &FractionConfig) -> Result<Self, NnError> {
        if config.hidden == 0 || n_inputs == 0 {
            return Err(NnError::BadArchitecture("zero-width layer".into()));
        }
        let h = config.hidden;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut params = Vec::with_capacity(n_inputs * h + h + h * N_PHASES);
        for _ in 0..n_inputs * h {
            params.push(xavier_uniform(&mut rng, n_inputs, h));
        }
        params.extend(std::iter::repeat(0.0).take(h));
        for _ in 0..h * N_PHASES {
            params.push(xavier_uniform(&mut rng, h, N_PHASES));
        }
        Ok(FractionNet { n_inputs, hidden: h, params, loss: config.loss })
    }

    /// Assembles a network from explicit parameters, bypassing training.
    /// Tests use it to build nets with exactly known outputs.
    #[cfg(test)]
    pub(crate) fn from_params(
        n_inputs: usize,
        hidden: usize,
        params: Vec<f64>,
        loss: FractionLoss,
    ) -> Self {
        assert_eq!(params.len(), n_inputs * hidden + hidden + hidden * N_PHASES);
        FractionNet { n_inputs, hidden, params, loss }
    }

    pub fn n_inputs(&self) -> usize {
        self.n_inputs
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn param_count(&self) -> usize {
        self.params.len()
    }

    pub fn nudge_param(&mut self, index: usize, delta: f64) {
        self.params[index] += delta;
    }

    fn split_params(&self) -> (&[f64], &[f64], &[f64]) {
        let (w1, rest) = self.params.split_at(self.n_inputs * self.hidden);
        let (b1, w2) = rest.split_at(self.hidden);
        (w1, b1, w2)
    }

    fn forward(&self, row: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let (w1, b1, w2) = self.split_params();
        let h = self.hidden;
        let mut z1 = b1.to_vec();
        for (i, &x) in row.iter().enumerate() {
            if x == 0.0 {
                continue;
            }
            for (j, z) in z1.iter_mut().enumerate() {
                *z += x * w1[i * h + j];
            }
        }
        let a1: Vec<f64> = z1.iter().map(|&z| relu6(z)).collect();
        let mut logits = vec![0.0; N_PHASES];
        for (j, &a) in a1.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            for (k, l) in logits.iter_mut().enumerate() {
                *l += a * w2[j * N_PHASES + k];
            }
        }
        let p = softmax(&logits);
        (z1, a1, p)
    }

    /// Predicted phase fractions (ferrite, pearlite, bainite, martensite);
    /// always a point on the simplex.
    pub fn predict_fractions(&self, row: &[f64]) -> Result<[f64; N_PHASES], NnError> {
        if row.len() != self.n_inputs {
            return Err(NnError::WidthMismatch { expected: self.n_inputs, got: row.len() });
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(NnError::NonFiniteInput);
        }
        let (_, _, p) = self.forward(row);
        Ok([p[0], p[1], p[2], p[3]])
    }

    /// Mean loss over the given rows with its analytic gradient.
    pub fn loss_and_grad(&self, x: &Matrix, y: &Matrix, rows: &[usize]) -> (f64, Vec<f64>) {
        let (_, _, w2) = self.split_params();
        let h = self.hidden;
        let n = rows.len() as f64;
        let mut grad = vec![0.0; self.params.len()];
        let mut loss = 0.0;
        let w1_len = self.n_inputs * h;

        for &r in rows {
            let row = x.row(r);
            let target = y.row(r);
            let (z1, a1, p) = self.forward(row);

            let mut dlogits = vec![0.0; N_PHASES];
            match self.loss {
                FractionLoss::CrossEntropy => {
                    for k in 0..N_PHASES {
                        loss -= target[k] * p[k].max(1e-12).ln() / n;
                        dlogits[k] = (p[k] - target[k]) / n;
                    }
                }
                FractionLoss::SquaredError => {
                    let mut dp = vec![0.0; N_PHASES];
                    for k in 0..N_PHASES {
                        let d = p[k] - target[k];
                        loss += d * d / (N_PHASES as f64 * n);
                        dp[k] = 2.0 * d / (N_PHASES as f64 * n);
                    }
                    let s: f64 = dp.iter().zip(&p).map(|(&d, &pk)| d * pk).sum();
                    for k in 0..N_PHASES {
                        dlogits[k] = p[k] * (dp[k] - s);
                    }
                }
            }

            let mut da1 = vec![0.0; h];
            for (j, &a) in a1.iter().enumerate() {
                for (k, &dl) in dlogits.iter().enumerate() {
                    grad[w1_len + h + j * N_PHASES + k] += a * dl;
                    da1[j] += w2[j * N_PHASES + k] * dl;
                }
            }
            for (j, d) in da1.iter_mut().enumerate() {
                // relu6 passes gradient only on its linear segment.
                if !(z1[j] > 0.0 && z1[j] < 6.0) {
                    *d = 0.0;
                }
            }
            for (i, &xv) in row.iter().enumerate() {
                if xv == 0.0 {
                    continue;
                }
                for (j, &d) in da1.iter().enumerate() {
                    grad[i * h + j] += xv * d;
                }
            }
            for (j, &d) in da1.iter().enumerate() {
                grad[w1_len + j] += d;
            }
        }
        (loss, grad)
    }
}

/// Trains a fraction network.
///
/// `y` must be `n x 4` with non-negative rows summing to 1 within 1e-6.
/// A seeded shuffle puts ~`val_frac` of the rows (at least one) aside for
/// validation; training stops once validation loss has not improved for
/// `patience` consecutive epochs and the best-epoch parameters are kept.
pub fn fit_fraction_net(
    x: &Matrix,
    y: &Matrix,
    config: &FractionConfig,
) -> Result<(FractionNet, TrainingLog), NnError> {
    if x.rows() < 2 {
        return Err(NnError::EmptyData);
    }
    if y.cols() != N_PHASES || y.rows() != x.rows() {
        return Err(NnError::WidthMismatch { expected: N_PHASES, got: y.cols() });
    }
    if x.as_slice().iter().any(|v| !v.is_finite()) {
        return Err(NnError::NonFiniteInput);
    }
    for r in 0..y.rows() {
        let row = y.row(r);
        let sum: f64 = row.iter().sum();
        if row.iter().any(|&v| !(0.0..=1.0 + 1e-9).contains(&v)) || (sum - 1.0).abs() > 1e-6 {
            return Err(NnError::TargetNotSimplex { row: r });
        }
    }

    let mut net = FractionNet::init(x.cols(), config)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..x.rows()).collect();
    order.shuffle(&mut rng);
    let n_val = ((config.val_frac * x.rows() as f64).ceil() as usize).clamp(1, x.rows() - 1);
    let val_rows: Vec<usize> = order[..n_val].to_vec();
    let train_rows: Vec<usize> = order[n_val..].to_vec();

    let mut adam = AdamState::new(net.param_count(), config.adam);
    let mut log = TrainingLog {
        train_loss: Vec::new(),
        val_loss: Vec::new(),
        stop_epoch: 0,
        best_epoch: 0,
        stop_reason: StopReason::MaxEpochs,
        val_rows: n_val,
    };
    let mut best_params = net.params.clone();
    let mut best_val = f64::INFINITY;
    let mut stale = 0usize;

    let mut batch_order = train_rows.clone();
    for epoch in 1..=config.max_epochs {
        batch_order.shuffle(&mut rng);
        for batch in batch_order.chunks(config.batch_size.max(1)) {
            let (loss, grad) = net.loss_and_grad(x, y, batch);
            if !loss.is_finite() {
                return Err(NnError::NonFiniteLoss { epoch });
            }
            adam.apply(&mut net.params, &grad);
        }
        let (train_loss, _) = net.loss_and_grad(x, y, &train_rows);
        let (val_loss, _) = net.loss_and_grad(x, y, &val_rows);
        if !train_loss.is_finite() || !val_loss.is_finite() {
            return Err(NnError::NonFiniteLoss { epoch });
        }
        log.train_loss.push(train_loss);
        log.val_loss.push(val_loss);
        log.stop_epoch = epoch;

        if val_loss < best_val {
            best_val = val_loss;
            best_params.copy_from_slice(&net.params);
            log.best_epoch = epoch;
            stale = 0;
        } else {
            stale += 1;
            if stale >= config.patience {
                log.stop_reason = StopReason::Patience;
                break;
            }
        }
    }
    net.params = best_params;
    Ok((net, log))
}
