//! Mirror-architecture autoencoder with tanh hidden layers and a linear
//! output, trained full-batch with Adam on mean squared reconstruction
//! error. Rows that reconstruct badly are candidate digitization errors.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::adam::{AdamParams, AdamState};
use super::xavier_uniform;
use crate::matrix::Matrix;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum NnError {
    #[error("expected {expected} input columns, got {got}")]
    WidthMismatch { expected: usize, got: usize },
    #[error("bad network architecture: {0}")]
    BadArchitecture(String),
    #[error("training loss became non-finite at epoch {epoch}")]
    NonFiniteLoss { epoch: usize },
    #[error("no training rows supplied")]
    EmptyData,
    #[error("non-finite value in network input")]
    NonFiniteInput,
    #[error("target row {row} does not sum to 1")]
    TargetNotSimplex { row: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AutoencoderConfig {
    /// Layer widths, first to last. Must mirror (read the same reversed)
    /// so the decoder is the encoder's transpose in shape.
    pub widths: Vec<usize>,
    pub seed: u64,
    /// Training stops once the epoch-to-epoch loss change drops below
    /// this, i.e. the loss has converged to within the given digits.
    pub stop_tol: f64,
    pub max_epochs: usize,
    pub adam: AdamParams,
}

impl AutoencoderConfig {
    /// Default screening architecture for `width` input features: a
    /// width-4-4-width bottleneck.
    pub fn for_width(width: usize) -> Self {
        AutoencoderConfig {
            widths: vec![width, 4, 4, width],
            seed: 0,
            stop_tol: 1e-3,
            max_epochs: 5000,
            adam: AdamParams::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Autoencoder {
    widths: Vec<usize>,
    /// Per layer: row-major weights (in x out), then biases (out).
    params: Vec<f64>,
    pub epochs_run: usize,
    pub final_loss: f64,
    pub converged: bool,
}

fn param_count(widths: &[usize]) -> usize {
    widths.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
}

impl Autoencoder {
    /// Builds an untrained network with Xavier-uniform weights and zero
    /// biases, deterministically from the seed.
    pub fn init(config: &AutoencoderConfig) -> Result<Self, NnError> {
        let widths = &config.widths;
        if widths.len() < 3 {
            return Err(NnError::BadArchitecture(format!(
                "need at least 3 layers, got {}",
                widths.len()
            )));
        }
        if widths.iter().rev().ne(widths.iter()) {
            return Err(NnError::BadArchitecture(format!("widths {widths:?} do not mirror")));
        }
        if widths.iter().any(|&w| w == 0) {
            return Err(NnError::BadArchitecture("zero-width layer".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut params = Vec::with_capacity(param_count(widths));
        for w in widths.windows(2) {
            for _ in 0..w[0] * w[1] {
                params.push(xavier_uniform(&mut rng, w[0], w[1]));
            }
            params.extend(std::iter::repeat(0.0).take(w[1]));
        }
        Ok(Autoencoder {
            widths: widths.clone(),
            params,
            epochs_run: 0,
            final_loss: f64::INFINITY,
            converged: false,
        })
    }

    /// Trains full-batch until the loss change falls under `stop_tol` or
    /// the epoch budget runs out. A zero budget returns the initialized
    /// network with its loss evaluated.
    pub fn train(x: &Matrix, config: &AutoencoderConfig) -> Result<Self, NnError> {
        if x.rows() == 0 {
            return Err(NnError::EmptyData);
        }
        if x.as_slice().iter().any(|v| !v.is_finite()) {
            return Err(NnError::NonFiniteInput);
        }
        let mut net = Self::init(config)?;
        if x.cols() != net.widths[0] {
            return Err(NnError::WidthMismatch { expected: net.widths[0], got: x.cols() });
        }
        let mut adam = AdamState::new(net.params.len(), config.adam);
        let mut prev_loss: Option<f64> = None;
        for epoch in 0..config.max_epochs {
            let (loss, grad) = net.loss_and_grad(x);
            if !loss.is_finite() {
                return Err(NnError::NonFiniteLoss { epoch });
            }
            if let Some(prev) = prev_loss {
                if (prev - loss).abs() < config.stop_tol {
                    net.converged = true;
                    break;
                }
            }
            prev_loss = Some(loss);
            adam.apply(&mut net.params, &grad);
            net.epochs_run = epoch + 1;
        }
        let (final_loss, _) = net.loss_and_grad(x);
        if !final_loss.is_finite() {
            return Err(NnError::NonFiniteLoss { epoch: net.epochs_run });
        }
        net.final_loss = final_loss;
        Ok(net)
    }

    pub fn widths(&self) -> &[usize] {
        &self.widths
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn param_count(&self) -> usize {
        self.params.len()
    }

    /// Shifts one parameter in place; test hook for finite differences.
    pub fn nudge_param(&mut self, index: usize, delta: f64) {
        self.params[index] += delta;
    }

    fn forward(&self, row: &[f64]) -> Vec<Vec<f64>> {
        let n_layers = self.widths.len();
        let mut activations = Vec::with_capacity(n_layers);
        activations.push(row.to_vec());
        let mut offset = 0;
        for l in 0..n_layers - 1 {
            let (n_in, n_out) = (self.widths[l], self.widths[l + 1]);
            let w = &self.params[offset..offset + n_in * n_out];
            let b = &self.params[offset + n_in * n_out..offset + n_in * n_out + n_out];
            offset += n_in * n_out + n_out;
            let prev = &activations[l];
            let mut z = b.to_vec();
            for (i, &a) in prev.iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                for (j, zj) in z.iter_mut().enumerate() {
                    *zj += a * w[i * n_out + j];
                }
            }
            let last = l == n_layers - 2;
            if !last {
                for zj in z.iter_mut() {
                    *zj = zj.tanh();
                }
            }
            activations.push(z);
        }
        activations
    }

    pub fn reconstruct_row(&self, row: &[f64]) -> Result<Vec<f64>, NnError> {
        if row.len() != self.widths[0] {
            return Err(NnError::WidthMismatch { expected: self.widths[0], got: row.len() });
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(NnError::NonFiniteInput);
        }
        Ok(self.forward(row).pop().unwrap())
    }

    /// Per-row mean squared reconstruction error.
    pub fn reconstruction_errors(&self, x: &Matrix) -> Result<Vec<f64>, NnError> {
        let mut out = Vec::with_capacity(x.rows());
        for row in x.iter_rows() {
            let rec = self.reconstruct_row(row)?;
            let mse = rec
                .iter()
                .zip(row)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                / row.len() as f64;
            out.push(mse);
        }
        Ok(out)
    }

    /// Mean-per-element squared error over all rows, with its analytic
    /// gradient in parameter order.
    pub fn loss_and_grad(&self, x: &Matrix) -> (f64, Vec<f64>) {
        let n_layers = self.widths.len();
        let mut grad = vec![0.0; self.params.len()];
        let mut loss = 0.0;
        let denom = (x.rows() * self.widths[0]) as f64;

        // Parameter offsets per layer, reused in the backward sweep.
        let mut offsets = Vec::with_capacity(n_layers - 1);
        let mut off = 0;
        for l in 0..n_layers - 1 {
            offsets.push(off);
            off += self.widths[l] * self.widths[l + 1] + self.widths[l + 1];
        }

        for row in x.iter_rows() {
            let acts = self.forward(row);
            let output = &acts[n_layers - 1];
            let mut delta: Vec<f64> = output
                .iter()
                .zip(row)
                .map(|(&y, &t)| {
                    loss += (y - t) * (y - t) / denom;
                    2.0 * (y - t) / denom
                })
                .collect();

            for l in (0..n_layers - 1).rev() {
                let (n_in, n_out) = (self.widths[l], self.widths[l + 1]);
                let w_off = offsets[l];
                let b_off = w_off + n_in * n_out;
                let a_in = &acts[l];
                for (i, &a) in a_in.iter().enumerate() {
                    for (j, &d) in delta.iter().enumerate() {
                        grad[w_off + i * n_out + j] += a * d;
                    }
                }
                for (j, &d) in delta.iter().enumerate() {
                    grad[b_off + j] += d;
                }
                if l > 0 {
                    let w = &self.params[w_off..b_off];
                    let mut next = vec![0.0; n_in];
                    for (i, nx) in next.iter_mut().enumerate() {
                        let mut s = 0.0;
                        for (j, &d) in delta.iter().enumerate() {
                            s += w[i * n_out + j] * d;
                        }
                        // tanh'(z) expressed through the activation itself.
                        let a = a_in[i];
                        *nx = s * (1.0 - a * a);
                    }
                    delta = next;
                }
            }
        }
        (loss, grad)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::numeric_gradient;
    use rand::Rng;

    fn random_matrix(rows: usize, cols: usize, seed: u64) -> Matrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data: Vec<f64> = (0..rows * cols).map(|_| rng.random_range(-1.0..1.0)).collect();
        Matrix::from_vec(rows, cols, data)
    }

    #[test]
    fn init_is_deterministic_and_bounded() {
        let cfg = AutoencoderConfig::for_width(11);
        let a = Autoencoder::init(&cfg).unwrap();
        let b = Autoencoder::init(&cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.param_count(), 11 * 4 + 4 + 4 * 4 + 4 + 4 * 11 + 11);
        let limit = (6.0f64 / 15.0).sqrt();
        for &w in &a.params()[..44] {
            assert!(w.abs() <= limit);
        }
        let different = Autoencoder::init(&AutoencoderConfig { seed: 1, ..cfg }).unwrap();
        assert_ne!(a.params(), different.params());
    }

    #[test]
    fn rejects_non_mirrored_widths() {
        let cfg = AutoencoderConfig { widths: vec![8, 4, 3, 8], ..AutoencoderConfig::for_width(8) };
        assert!(matches!(Autoencoder::init(&cfg), Err(NnError::BadArchitecture(_))));
    }

    #[test]
    fn zero_epoch_budget_returns_finite_initial_loss() {
        let x = random_matrix(10, 6, 3);
        let cfg = AutoencoderConfig { max_epochs: 0, ..AutoencoderConfig::for_width(6) };
        let net = Autoencoder::train(&x, &cfg).unwrap();
        assert_eq!(net.epochs_run, 0);
        assert!(net.final_loss.is_finite());
    }

    #[test]
    fn memorizes_constant_data() {
        // 50 identical rows: the network only has to learn one vector, so
        // the reconstruction error must collapse toward zero.
        let row: Vec<f64> = vec![0.8, -0.3, 0.5, 1.2, -0.9, 0.1];
        let rows: Vec<Vec<f64>> = (0..50).map(|_| row.clone()).collect();
        let x = Matrix::from_rows(&rows);
        let cfg = AutoencoderConfig {
            stop_tol: 0.0,
            max_epochs: 4000,
            adam: AdamParams { learning_rate: 5e-3, ..Default::default() },
            ..AutoencoderConfig::for_width(6)
        };
        let net = Autoencoder::train(&x, &cfg).unwrap();
        assert!(net.final_loss < 1e-4, "loss {}", net.final_loss);
        let errs = net.reconstruction_errors(&x).unwrap();
        assert!(errs.iter().all(|&e| e < 1e-3));
    }

    #[test]
    fn loss_decreases_monotonically_at_the_start() {
        let x = random_matrix(30, 5, 9);
        let cfg = AutoencoderConfig { max_epochs: 0, ..AutoencoderConfig::for_width(5) };
        let mut net = Autoencoder::train(&x, &cfg).unwrap();
        let mut adam = AdamState::new(net.param_count(), AdamParams::default());
        let mut losses = Vec::new();
        for _ in 0..30 {
            let (loss, grad) = net.loss_and_grad(&x);
            losses.push(loss);
            let mut p = net.params.clone();
            adam.apply(&mut p, &grad);
            net.params = p;
        }
        assert!(losses.windows(2).all(|w| w[1] <= w[0] + 1e-9), "{losses:?}");
    }

    #[test]
    fn stop_tolerance_halts_training_early() {
        let x = random_matrix(20, 4, 5);
        let loose = AutoencoderConfig {
            stop_tol: 1e-2,
            max_epochs: 5000,
            ..AutoencoderConfig::for_width(4)
        };
        let net = Autoencoder::train(&x, &loose).unwrap();
        assert!(net.converged);
        assert!(net.epochs_run < 5000);
    }

    #[test]
    fn analytic_gradient_matches_finite_differences() {
        let x = random_matrix(7, 5, 21);
        let cfg = AutoencoderConfig { widths: vec![5, 3, 3, 5], ..AutoencoderConfig::for_width(5) };
        let net = Autoencoder::init(&cfg).unwrap();
        let (_, analytic) = net.loss_and_grad(&x);

        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let indices: Vec<usize> =
            (0..10).map(|_| rng.random_range(0..net.param_count())).collect();
        let numeric = numeric_gradient(net.params(), &indices, 1e-5, |theta| {
            let mut probe = net.clone();
            probe.params.copy_from_slice(theta);
            probe.loss_and_grad(&x).0
        });
        for (&i, &num) in indices.iter().zip(&numeric) {
            let ana = analytic[i];
            let rel = (ana - num).abs() / ana.abs().max(num.abs()).max(1e-8);
            assert!(rel < 1e-4, "param {i}: analytic {ana}, numeric {num}, rel {rel}");
        }
    }

    #[test]
    fn width_mismatch_is_reported() {
        let x = random_matrix(4, 6, 1);
        let cfg = AutoencoderConfig::for_width(5);
        assert!(matches!(
            Autoencoder::train(&x, &cfg),
            Err(NnError::WidthMismatch { expected: 5, got: 6 })
        ));
    }
}
