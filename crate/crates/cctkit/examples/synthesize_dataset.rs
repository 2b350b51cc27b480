//! Generates a synthetic CCT corpus from the closed-form oracle and
//! writes it as JSONL.
//!
//! The oracle is a fully parametric ground truth: critical temperatures,
//! starts and ranges are linear in composition, phase-presence windows
//! are rate cutoffs, and Gaussian noise lands on temperatures only, so a
//! model trained on the output can be scored against exact answers.
//!
//! Run with: cargo run --example synthesize_dataset

use std::fs::File;
use std::io::BufWriter;

use cctkit::data::write_dataset;
use cctkit::oracle::{generate_synthetic_dataset, OracleParams};
use cctkit::Phase;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let params = OracleParams { seed: 42, noise_sigma: 5.0, ..OracleParams::default() };
    let dataset = generate_synthetic_dataset(&params, 40, 8)?;

    println!(
        "synthesized {} rows across {} diagrams ({} rates per alloy)",
        dataset.len(),
        dataset.diagram_ids().len(),
        8
    );

    let mut present = [0usize; 4];
    let mut with_all_fractions = 0usize;
    for p in dataset.points() {
        for (k, rec) in p.phases.iter().enumerate() {
            present[k] += rec.present as usize;
        }
        if p.phases.iter().all(|r| r.fraction.is_some()) {
            with_all_fractions += 1;
        }
    }
    for (k, phase) in Phase::ALL.iter().enumerate() {
        println!("  {:<12} present in {:>4} rows", phase.name(), present[k]);
    }
    println!("  complete fraction simplex in {with_all_fractions} rows");

    let first = &dataset.points()[0];
    println!("\nfirst row of {}:", first.diagram_id);
    println!("  log10 rate {:+.2} K/s, austenitized {:.0} degC / {:.0} s",
        first.log_rate, first.aust.temperature, first.aust.time);
    for (k, phase) in Phase::ALL.iter().enumerate() {
        let rec = &first.phases[k];
        match (rec.present, rec.start_temp) {
            (true, Some(s)) => println!(
                "  {:<12} starts {:.1} degC, fraction {:.3}",
                phase.name(),
                s,
                rec.fraction.unwrap_or(f64::NAN)
            ),
            _ => println!("  {:<12} absent", phase.name()),
        }
    }

    let out = std::env::temp_dir().join("cctkit-synthetic.jsonl");
    write_dataset(&dataset, BufWriter::new(File::create(&out)?))?;
    println!("\nwrote {}", out.display());
    Ok(())
}
