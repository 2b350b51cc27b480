//! Synthesizes a full CCT diagram and renders it to SVG and CSV.
//!
//! The diagram sweeps a log-uniform grid of cooling rates, predicts
//! every point, and joins phase starts/finishes into loci, splitting a
//! locus wherever the phase disappears. The SVG plots temperature
//! against log time with one cooling path per sampled rate; the CSV is
//! one row per rate with every predicted quantity.
//!
//! Run with: cargo run --example render_diagram

use std::fs;

use cctkit::io::{diagram_to_csv, render_svg};
use cctkit::learners::{HyperParams, LearnerFamily, LearnerSpec, Task};
use cctkit::nn::FractionConfig;
use cctkit::oracle::{generate_synthetic_dataset, OracleParams};
use cctkit::stack::{generate_diagram, train_stack, StackConfig, DEFAULT_RATE_BOUNDS};
use cctkit::{Austenitization, Composition, Element};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let params = OracleParams { seed: 33, noise_sigma: 3.0, ..OracleParams::default() };
    let dataset = generate_synthetic_dataset(&params, 30, 7)?;

    let base = HyperParams::default();
    let grid = |task| {
        vec![
            LearnerSpec { family: LearnerFamily::Knn, task, hyper: HyperParams { k: 5, ..base }, seed: 33 },
            LearnerSpec {
                family: LearnerFamily::GradientBoost,
                task,
                hyper: HyperParams { n_trees: 60, max_depth: 3, learning_rate: 0.15, ..base },
                seed: 33,
            },
        ]
    };
    let config = StackConfig {
        classify_grid: grid(Task::Classify),
        regress_grid: grid(Task::Regress),
        fraction_net: FractionConfig { hidden: 24, max_epochs: 100, seed: 33, ..FractionConfig::default() },
        ..StackConfig::seeded(33)
    };
    let bundle = train_stack(&dataset, &config)?;

    let alloy = Composition::from_pairs(&[
        (Element::C, 0.35),
        (Element::Mn, 1.2),
        (Element::Si, 0.25),
        (Element::Cr, 0.9),
    ]);
    let aust = Austenitization { temperature: 1020.0, time: 900.0, time_imputed: false };

    let start = std::time::Instant::now();
    let diagram = generate_diagram(&bundle, &alloy, &aust, 100, DEFAULT_RATE_BOUNDS)?;
    println!(
        "synthesized {} rates in {:.1?}; {} loci",
        diagram.predictions.len(),
        start.elapsed(),
        diagram.loci.len()
    );
    for locus in &diagram.loci {
        let points: usize = locus.segments.iter().map(|s| s.len()).sum();
        println!(
            "  {:<12} {:?}: {} segment(s), {points} points",
            locus.phase.name(),
            locus.kind,
            locus.segments.len()
        );
    }

    let svg = render_svg(&diagram)?;
    let csv = diagram_to_csv(&diagram)?;
    let dir = std::env::temp_dir();
    let svg_path = dir.join("cctkit-diagram.svg");
    let csv_path = dir.join("cctkit-diagram.csv");
    fs::write(&svg_path, &svg)?;
    fs::write(&csv_path, &csv)?;

    println!("\nwrote {} ({} bytes)", svg_path.display(), svg.len());
    println!("wrote {} ({} bytes)", csv_path.display(), csv.len());
    println!("\nfirst CSV rows:");
    for line in csv.lines().take(4) {
        let short: String = line.chars().take(100).collect();
        println!("  {short}...");
    }
    Ok(())
}
