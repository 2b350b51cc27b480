//! Cross-validated selection and training of a single learner.
//!
//! Six model families (kNN, linear SVM, CART, random forest, gradient
//! boosting, second-order boosting) share one interface; a grid of
//! candidates is scored with diagram-grouped k-fold cross-validation and
//! the winner is refit on all rows. The problem here is the martensite
//! start of the synthetic oracle: linear in composition, so the SVM is a
//! strong contender, but trees get close.
//!
//! Run with: cargo run --example train_learner

use cctkit::data::StandardScaler;
use cctkit::learners::{
    fit_with_cv, HyperParams, LearnerFamily, LearnerSpec, Task,
};
use cctkit::oracle::OracleParams;
use cctkit::{Composition, Element, Matrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let oracle = OracleParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(5);

    // 120 alloys, one row each: features are the four sampled elements,
    // the target is the oracle martensite start plus measurement noise.
    let mut x = Matrix::zeros(0, 0);
    let mut y = Vec::new();
    let mut ids = Vec::new();
    for i in 0..120 {
        let c = Composition::from_pairs(&[
            (Element::C, rng.random_range(0.05..1.0)),
            (Element::Mn, rng.random_range(0.1..2.0)),
            (Element::Si, rng.random_range(0.05..1.5)),
            (Element::Cr, rng.random_range(0.1..4.5)),
        ]);
        x.push_row(&[
            c.get(Element::C),
            c.get(Element::Mn),
            c.get(Element::Si),
            c.get(Element::Cr),
        ]);
        y.push(oracle.ms_of(&c) + rng.random_range(-3.0..3.0));
        ids.push(format!("alloy-{i:03}"));
    }
    let scaler = StandardScaler::fit(&x)?;
    let xs = scaler.transform(&x)?;
    let id_refs: Vec<&str> = ids.iter().map(|s| s.as_str()).collect();

    let task = Task::Regress;
    let base = HyperParams::default();
    let spec = |family, hyper| LearnerSpec { family, task, hyper, seed: 1 };
    let grid = vec![
        spec(LearnerFamily::Knn, HyperParams { k: 5, ..base }),
        spec(LearnerFamily::Svm, HyperParams { lambda: 1e-4, svm_epochs: 80, ..base }),
        spec(LearnerFamily::Tree, HyperParams { max_depth: 6, ..base }),
        spec(LearnerFamily::Forest, HyperParams { n_trees: 80, max_depth: 8, ..base }),
        spec(
            LearnerFamily::GradientBoost,
            HyperParams { n_trees: 120, max_depth: 3, learning_rate: 0.1, ..base },
        ),
        spec(
            LearnerFamily::ExtremeBoost,
            HyperParams { n_trees: 120, max_depth: 3, learning_rate: 0.1, l2_leaf: 1.0, ..base },
        ),
    ];

    let (model, report) = fit_with_cv(&grid, &xs, &y, None, &id_refs, 3, 17)?;

    println!("grid scores ({} folds, metric {}):", report.folds, report.metric);
    for (i, cell) in report.cells.iter().enumerate() {
        let marker = if i == report.chosen { "  <- chosen" } else { "" };
        println!("  {:<30} mae {:>6.2} degC{marker}", cell.label, cell.mean_error);
    }

    // The refit winner predicts held-out alloys it never saw.
    let mut probe_err = 0.0;
    let n_probe = 40;
    for _ in 0..n_probe {
        let c = Composition::from_pairs(&[
            (Element::C, rng.random_range(0.05..1.0)),
            (Element::Mn, rng.random_range(0.1..2.0)),
            (Element::Si, rng.random_range(0.05..1.5)),
            (Element::Cr, rng.random_range(0.1..4.5)),
        ]);
        let row = scaler.transform_row(&[
            c.get(Element::C),
            c.get(Element::Mn),
            c.get(Element::Si),
            c.get(Element::Cr),
        ])?;
        probe_err += (model.predict_row(&row)? - oracle.ms_of(&c)).abs();
    }
    println!("\nfresh-alloy MAE of the refit winner: {:.2} degC", probe_err / n_probe as f64);
    Ok(())
}
