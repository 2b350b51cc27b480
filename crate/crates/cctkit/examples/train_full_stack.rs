//! End-to-end training of the fourteen-sub-model stack.
//!
//! Training runs in dependency order: critical temperatures first (they
//! feed the equilibrium anchor rows), then presence augmentation, the
//! fraction net, the presence classifiers, and the start/range chain
//! where each downstream model consumes out-of-fold predictions of its
//! upstream models, never their resubstitution outputs.
//!
//! Run with: cargo run --example train_full_stack

use cctkit::learners::{HyperParams, LearnerFamily, LearnerSpec, Task};
use cctkit::nn::FractionConfig;
use cctkit::oracle::{generate_synthetic_dataset, OracleParams};
use cctkit::stack::{train_stack, StackConfig};

fn quick_grid(task: Task, seed: u64) -> Vec<LearnerSpec> {
    let base = HyperParams::default();
    vec![
        LearnerSpec { family: LearnerFamily::Knn, task, hyper: HyperParams { k: 5, ..base }, seed },
        LearnerSpec {
            family: LearnerFamily::Tree,
            task,
            hyper: HyperParams { max_depth: 6, min_leaf: 2, ..base },
            seed,
        },
        LearnerSpec {
            family: LearnerFamily::GradientBoost,
            task,
            hyper: HyperParams { n_trees: 60, max_depth: 3, learning_rate: 0.15, ..base },
            seed,
        },
    ]
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let params = OracleParams { seed: 20, noise_sigma: 4.0, ..OracleParams::default() };
    let dataset = generate_synthetic_dataset(&params, 40, 8)?;

    let config = StackConfig {
        seed: 20,
        classify_grid: quick_grid(Task::Classify, 20),
        regress_grid: quick_grid(Task::Regress, 20),
        fraction_net: FractionConfig { hidden: 32, max_epochs: 120, seed: 20, ..FractionConfig::default() },
        ..StackConfig::seeded(20)
    };

    let start = std::time::Instant::now();
    let bundle = train_stack(&dataset, &config)?;
    let elapsed = start.elapsed();

    let d = &bundle.diagnostics;
    println!(
        "trained {} sub-models plus the fraction net in {:.1?}",
        bundle.models.len(),
        elapsed
    );
    println!(
        "rows: {} measured, +{} augmented presence, +{} equilibrium anchors",
        d.rows_measured, d.rows_augmented, d.rows_anchor
    );
    println!(
        "fraction net: {} complete-simplex rows ({} skipped), best epoch {}",
        d.fraction_rows, d.fraction_rows_skipped, bundle.fractions.log.best_epoch
    );

    println!("\nmodel selection (3-fold diagram-grouped CV):");
    for (id, label, err) in &d.chosen {
        match err {
            Some(e) => println!("  {:<10} {:<28} cv error {:>7.3}", id.label(), label, e),
            None => println!("  {:<10} {:<28} (no cv, too few diagrams)", id.label(), label),
        }
    }
    if !d.forced_constant.is_empty() {
        println!("  forced constant: {:?}", d.forced_constant);
    }
    if d.oof_fallbacks > 0 {
        println!("  {} out-of-fold feature requests fell back to the final model", d.oof_fallbacks);
    }

    println!("\ntrained on {} diagrams; bundle schema {}", bundle.train_diagram_ids.len(), bundle.schema);
    bundle.validate()?;
    println!("bundle validates: wiring acyclic, inventory complete, contracts met");
    Ok(())
}
