//! Saves a trained bundle to a checksummed archive and proves the load
//! is exact: the reloaded bundle compares equal and predicts
//! bit-identically.
//!
//! The archive is a zip of JSON blobs plus a manifest carrying a sha256
//! per entry, so tampering and partial writes surface as load errors
//! rather than silently different predictions. Determinism is part of
//! the contract: the same dataset, config and seed always produce the
//! same bundle.
//!
//! Run with: cargo run --example bundle_roundtrip

use cctkit::io::{load_bundle, save_bundle};
use cctkit::learners::{HyperParams, LearnerFamily, LearnerSpec, Task};
use cctkit::nn::FractionConfig;
use cctkit::oracle::{generate_synthetic_dataset, OracleParams};
use cctkit::stack::{predict_point, train_stack, StackConfig};
use cctkit::{Austenitization, Composition, Element};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let params = OracleParams { seed: 2, noise_sigma: 3.0, ..OracleParams::default() };
    let dataset = generate_synthetic_dataset(&params, 24, 6)?;

    let base = HyperParams::default();
    let grid = |task| {
        vec![
            LearnerSpec { family: LearnerFamily::Knn, task, hyper: HyperParams { k: 5, ..base }, seed: 2 },
            LearnerSpec {
                family: LearnerFamily::Tree,
                task,
                hyper: HyperParams { max_depth: 6, min_leaf: 2, ..base },
                seed: 2,
            },
        ]
    };
    let config = StackConfig {
        classify_grid: grid(Task::Classify),
        regress_grid: grid(Task::Regress),
        fraction_net: FractionConfig { hidden: 16, max_epochs: 80, seed: 2, ..FractionConfig::default() },
        ..StackConfig::seeded(2)
    };

    // Determinism first: two runs from the same inputs give equal bundles.
    let bundle = train_stack(&dataset, &config)?;
    let again = train_stack(&dataset, &config)?;
    assert_eq!(bundle, again, "training is not deterministic");
    println!("two training runs from the same seed produced equal bundles");

    let path = std::env::temp_dir().join("cctkit-bundle.cct");
    save_bundle(&bundle, &path)?;
    let bytes = std::fs::metadata(&path)?.len();
    println!("saved {} ({bytes} bytes)", path.display());

    let loaded = load_bundle(&path)?;
    assert_eq!(bundle, loaded, "reloaded bundle differs");
    println!("reloaded bundle compares equal to the original");

    // Bit-identical serving across the roundtrip.
    let alloy = Composition::from_pairs(&[(Element::C, 0.5), (Element::Mn, 1.0), (Element::Cr, 2.0)]);
    let aust = Austenitization { temperature: 1000.0, time: 600.0, time_imputed: false };
    let mut checked = 0;
    for i in 0..=20 {
        let log_rate = -3.0 + 6.0 * i as f64 / 20.0;
        let a = predict_point(&bundle, &alloy, &aust, log_rate)?;
        let b = predict_point(&loaded, &alloy, &aust, log_rate)?;
        assert_eq!(a, b, "prediction differs at log rate {log_rate}");
        checked += 1;
    }
    println!("{checked} predictions are bit-identical across the roundtrip");

    // The archive can be inspected without loading the models.
    let file = std::fs::File::open(&path)?;
    let mut zip = zip::ZipArchive::new(file)?;
    println!("\narchive inventory:");
    for i in 0..zip.len() {
        let entry = zip.by_index(i)?;
        println!("  {:<22} {:>8} bytes", entry.name(), entry.size());
    }
    Ok(())
}
