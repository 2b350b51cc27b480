//! Runs the bundled literature fixtures through a trained stack.
//!
//! The crate ships two fixture files: 34 published low-alloy and tool
//! steel compositions with the corpus-average reference errors, and 4
//! dilatometry alloys with no published per-phase errors. The benchmark
//! resolves missing austenitization values from the batch, synthesizes a
//! diagram per alloy and reports which phases appear.
//!
//! Run with: cargo run --example run_benchmark

use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use cctkit::eval::bench::{read_fixtures, run_benchmark};
use cctkit::learners::{HyperParams, LearnerFamily, LearnerSpec, Task};
use cctkit::nn::FractionConfig;
use cctkit::oracle::{generate_synthetic_dataset, OracleParams};
use cctkit::stack::{train_stack, StackConfig, DEFAULT_RATE_BOUNDS};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let params = OracleParams { seed: 6, noise_sigma: 4.0, ..OracleParams::default() };
    let dataset = generate_synthetic_dataset(&params, 30, 7)?;

    let base = HyperParams::default();
    let grid = |task| {
        vec![
            LearnerSpec { family: LearnerFamily::Knn, task, hyper: HyperParams { k: 5, ..base }, seed: 6 },
            LearnerSpec {
                family: LearnerFamily::GradientBoost,
                task,
                hyper: HyperParams { n_trees: 60, max_depth: 3, learning_rate: 0.15, ..base },
                seed: 6,
            },
        ]
    };
    let config = StackConfig {
        classify_grid: grid(Task::Classify),
        regress_grid: grid(Task::Regress),
        fraction_net: FractionConfig { hidden: 24, max_epochs: 100, seed: 6, ..FractionConfig::default() },
        ..StackConfig::seeded(6)
    };
    let bundle = train_stack(&dataset, &config)?;

    let fixture_dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    for file in ["literature.jsonl", "dilatometry.jsonl"] {
        let path = fixture_dir.join(file);
        let (header, fixtures) = read_fixtures(BufReader::new(File::open(&path)?))?;
        println!("== {file}: {} ({} alloys)", header.description, fixtures.len());

        let report = run_benchmark(&bundle, &header, &fixtures, 60, DEFAULT_RATE_BOUNDS)?;
        println!("{}", report.render_text());
    }
    Ok(())
}
