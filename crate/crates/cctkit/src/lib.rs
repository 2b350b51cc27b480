//! Physics-informed prediction of continuous-cooling-transformation (CCT)
//! diagrams for low-alloy and tool steels.
//!
//! The engine trains a stack of fourteen sub-models from digitized CCT
//! records: four phase-presence classifiers (ferrite, pearlite, bainite,
//! martensite), four transformation start-temperature regressors, three
//! temperature-range regressors, two critical-temperature regressors
//! (Ac1, Ac3) and one softmax network for final phase fractions. Domain
//! rules are wired into both training and inference: presence labels are
//! interpolated between measured cooling rates, near-equilibrium anchor
//! rows tie slow-rate starts to the predicted critical temperatures,
//! start temperatures feed the range regressors, and impossible outputs
//! (bainite finishing below the martensite start, bainite reported under
//! a saturated ferrite+pearlite fraction) are overridden and flagged.
//!
//! The crate is organised as a library first. Each major capability has a
//! runnable example under `examples/`:
//!
//! * `synthesize_dataset` - generate a closed-form synthetic CCT corpus
//! * `screen_outliers` - autoencoder reconstruction-error screening
//! * `split_and_scale` - diagram-grouped splits and feature scaling
//! * `train_learner` - cross-validated single-model training
//! * `train_fraction_net` - the softmax phase-fraction network
//! * `train_full_stack` - end-to-end stack training
//! * `predict_single_point` - one alloy, one cooling rate
//! * `render_diagram` - full diagram synthesis to SVG/CSV
//! * `run_benchmark` - bundled literature fixtures
//! * `bundle_roundtrip` - model persistence and fingerprints
//!
//! A thin command-line front end (`cct`) exposes the same pipeline as
//! subcommands (`ingest`, `clean`, `split`, `synth`, `train`, `eval`,
//! `bench`, `predict`, `diagram`).

pub mod cli;
pub mod data;
pub mod eval;
pub mod io;
pub mod learners;
pub mod matrix;
pub mod nn;
pub mod oracle;
pub mod screen;
pub mod stack;

pub use data::{
    Austenitization, Composition, DataPoint, Dataset, Element, Phase, PhaseRecord,
    ValidationError, ValidationWarning,
};
pub use matrix::Matrix;
