//! Trains the softmax phase-fraction network on oracle data.
//!
//! The network maps the 20 base features to a point on the 4-simplex
//! (ferrite, pearlite, bainite, martensite fractions summing to one, by
//! construction of the softmax output). Training uses Adam on shuffled
//! mini-batches with early stopping on a held-out validation slice.
//!
//! Run with: cargo run --example train_fraction_net

use cctkit::data::StandardScaler;
use cctkit::nn::{fit_fraction_net, FractionConfig};
use cctkit::oracle::{generate_synthetic_dataset, OracleParams};
use cctkit::{Matrix, Phase};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let params = OracleParams { seed: 8, noise_sigma: 0.0, ..OracleParams::default() };
    let dataset = generate_synthetic_dataset(&params, 60, 8)?;

    // Oracle rows always carry a complete fraction simplex. Features are
    // standardized; raw temperatures would saturate the hidden layer.
    let mut raw = Matrix::zeros(0, 0);
    let mut y = Matrix::zeros(0, 0);
    for p in dataset.points() {
        let target: Vec<f64> = p.phases.iter().map(|r| r.fraction.unwrap()).collect();
        raw.push_row(&p.features());
        y.push_row(&target);
    }
    let scaler = StandardScaler::fit(&raw)?;
    let x = scaler.transform(&raw)?;

    let cfg = FractionConfig { hidden: 48, seed: 4, max_epochs: 300, patience: 10, ..FractionConfig::default() };
    let (net, log) = fit_fraction_net(&x, &y, &cfg)?;

    println!(
        "trained on {} rows, stopped after {} epochs ({:?}), kept epoch {}",
        x.rows(),
        log.stop_epoch,
        log.stop_reason,
        log.best_epoch
    );
    println!(
        "validation loss: first {:.4} -> best {:.4} ({} validation rows)",
        log.val_loss.first().unwrap(),
        log.val_loss[log.best_epoch - 1],
        log.val_rows
    );

    // Every output lies on the simplex, trained or not.
    let mut mae = [0.0; 4];
    for r in 0..x.rows() {
        let p = net.predict_fractions(x.row(r))?;
        let sum: f64 = p.iter().sum();
        assert!((sum - 1.0).abs() < 1e-9, "output left the simplex");
        for k in 0..4 {
            mae[k] += (p[k] - y.get(r, k)).abs();
        }
    }
    println!("\nper-phase MAE over the training corpus:");
    for (k, phase) in Phase::ALL.iter().enumerate() {
        println!("  {:<12} {:.1} percentage points", phase.name(), mae[k] / x.rows() as f64 * 100.0);
    }

    let sample = net.predict_fractions(x.row(0))?;
    println!("\nrow 0 prediction: F {:.3}  P {:.3}  B {:.3}  M {:.3}", sample[0], sample[1], sample[2], sample[3]);
    println!("row 0 truth:      F {:.3}  P {:.3}  B {:.3}  M {:.3}", y.get(0, 0), y.get(0, 1), y.get(0, 2), y.get(0, 3));
    Ok(())
}
