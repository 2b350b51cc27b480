//! Diagram-grouped splitting and feature scaling.
//!
//! All rows of one CCT diagram describe the same physical experiment, so
//! a random row split would leak nearly identical rows across the
//! train/test boundary. Splits and cross-validation folds therefore move
//! whole diagrams. Scaling comes in two flavours: standardization for
//! the learners and a rank-based quantile transform that tames skewed
//! columns such as the hold time.
//!
//! Run with: cargo run --example split_and_scale

use std::collections::HashSet;

use cctkit::data::{assign_diagram_folds, split_by_diagram, QuantileScaler, StandardScaler};
use cctkit::oracle::{generate_synthetic_dataset, OracleParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let params = OracleParams { seed: 12, ..OracleParams::default() };
    let dataset = generate_synthetic_dataset(&params, 24, 7)?;

    let (train, test) = split_by_diagram(&dataset, 0.25, 99)?;
    let train_ids: HashSet<&str> = train.diagram_ids().into_iter().collect();
    let test_ids: HashSet<&str> = test.diagram_ids().into_iter().collect();
    println!(
        "split {} diagrams into {} train / {} test ({} / {} rows)",
        dataset.diagram_ids().len(),
        train_ids.len(),
        test_ids.len(),
        train.len(),
        test.len()
    );
    let overlap: Vec<_> = train_ids.intersection(&test_ids).collect();
    println!("diagram overlap: {overlap:?}");
    assert!(overlap.is_empty(), "a diagram leaked across the split");

    // Fold assignment for cross-validation follows the same rule: every
    // row of a diagram lands in the same fold.
    let points = train.points();
    let ids: Vec<&str> = points.iter().map(|p| p.diagram_id.as_str()).collect();
    let fold_of = assign_diagram_folds(&ids, 3, 7)?;
    for fold in 0..3 {
        let rows = fold_of.iter().filter(|&&f| f == fold).count();
        let diagrams: HashSet<&str> = ids
            .iter()
            .zip(&fold_of)
            .filter(|&(_, &f)| f == fold)
            .map(|(&id, _)| id)
            .collect();
        println!("  fold {fold}: {} diagrams, {rows} rows", diagrams.len());
    }

    // Standardization: fit on train only, apply everywhere.
    let x_train = train.feature_matrix();
    let scaler = StandardScaler::fit(&x_train)?;
    let scaled = scaler.transform(&x_train)?;
    let names = &train.feature_stats().names;
    println!("\nstandardized train features (first 4 of {}):", names.len());
    for c in [0usize, 1, 17, 19] {
        let col: Vec<f64> = (0..scaled.rows()).map(|r| scaled.get(r, c)).collect();
        let mean = col.iter().sum::<f64>() / col.len() as f64;
        let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / col.len() as f64;
        println!("  {:<10} mean {:+.2e}, std {:.3}", names[c], mean, var.sqrt());
    }

    // The quantile transform maps each column to [0, 1] by rank.
    let q = QuantileScaler::fit(&x_train)?;
    let qt = q.transform(&x_train)?;
    let hold: Vec<f64> = (0..qt.rows()).map(|r| qt.get(r, 18)).collect();
    let (lo, hi) = hold.iter().fold((f64::MAX, f64::MIN), |(l, h), &v| (l.min(v), h.max(v)));
    println!("\nquantile-transformed {}: range [{lo:.3}, {hi:.3}]", names[18]);

    Ok(())
}
