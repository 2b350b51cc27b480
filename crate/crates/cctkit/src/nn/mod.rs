//! Small dense networks trained with Adam: a reconstruction autoencoder
//! for outlier screening and a softmax network for phase fractions.
//!
//! Parameters live in flat vectors so the optimizer, serialization and
//! finite-difference gradient checks all address them uniformly.

mod adam;
mod autoencoder;
mod fraction;

pub use adam::{AdamParams, AdamState};
pub use autoencoder::{Autoencoder, AutoencoderConfig, NnError};
pub use fraction::{
    fit_fraction_net, relu6, softmax, FractionConfig, FractionLoss, FractionNet, StopReason,
    TrainingLog,
};

use rand::Rng;

/// Xavier-uniform initialization: weights drawn from
/// +/- sqrt(6 / (fan_in + fan_out)), biases zero.
pub(crate) fn xavier_uniform<R: Rng>(rng: &mut R, fan_in: usize, fan_out: usize) -> f64 {
    let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
    rng.random_range(-limit..limit)
}

/// Central finite-difference gradient of `loss` at `theta`, step `h`.
/// Used by tests to check analytic gradients.
pub fn numeric_gradient<F: FnMut(&[f64]) -> f64>(
    theta: &[f64],
    indices: &[usize],
    h: f64,
    mut loss: F,
) -> Vec<f64> {
    let mut theta = theta.to_vec();
    indices
        .iter()
        .map(|&i| {
            let orig = theta[i];
            theta[i] = orig + h;
            let up = loss(&theta);
            theta[i] = orig - h;
            let down = loss(&theta);
            theta[i] = orig;
            (up - down) / (2.0 * h)
        })
        .collect()
}
