//! Flags likely digitization errors by autoencoder reconstruction error.
//!
//! A small mirror autoencoder is trained on per-row screening features
//! (key elements, austenitization, cooling rate, first start temperature,
//! fraction sum). Rows the network cannot reconstruct sit far from the
//! bulk of the data; the worst ones are flagged for removal. Here three
//! rows get deliberate typos and the screen has to find them.
//!
//! Run with: cargo run --example screen_outliers

use cctkit::oracle::{generate_synthetic_dataset, OracleParams};
use cctkit::screen::{drop_points, screen_dataset, ScreenConfig};
use cctkit::{Dataset, Element};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let params = OracleParams { seed: 3, noise_sigma: 3.0, ..OracleParams::default() };
    let clean = generate_synthetic_dataset(&params, 30, 6)?;

    // Three distinct digitization accidents: a carbon content with a
    // slipped decimal point, a hold time with a doubled digit, and
    // fractions entered as percents.
    let mut points = clean.points().to_vec();
    let corrupted = [12usize, 66, 132];
    let c = points[12].composition.get(Element::C);
    points[12].composition.set(Element::C, 10.0 * c);
    points[66].aust.time *= 40.0;
    for rec in points[132].phases.iter_mut() {
        if let Some(f) = rec.fraction.as_mut() {
            *f *= 100.0;
        }
    }
    let suspect = Dataset::new(points)?;

    let config = ScreenConfig { seed: 9, max_epochs: 800, ..ScreenConfig::default() };
    let report = screen_dataset(&suspect, 3, &config)?;

    println!(
        "screened {} rows with {} features ({} cells imputed), autoencoder ran {} epochs",
        suspect.len(),
        config.features.len(),
        report.imputed,
        report.net.epochs_run
    );

    let mean_err = report.errors.iter().sum::<f64>() / report.errors.len() as f64;
    println!("mean reconstruction error {mean_err:.4}");
    println!("\nflagged rows (planted typos at {corrupted:?}):");
    for &i in &report.flagged {
        let planted = if corrupted.contains(&i) { "  <- planted" } else { "" };
        println!("  row {:>3}  error {:.4}{planted}", i, report.errors[i]);
    }

    let recovered = report.flagged.iter().filter(|i| corrupted.contains(i)).count();
    println!("\nrecovered {recovered} of {} planted typos", corrupted.len());

    let cleaned = drop_points(&suspect, &report.flagged)?;
    println!("dropped flagged rows: {} -> {} rows", suspect.len(), cleaned.len());
    Ok(())
}
