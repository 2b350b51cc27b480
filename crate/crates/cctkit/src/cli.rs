//! Command-line front end.
//!
//! Every subcommand is a thin wrapper over the library: parse arguments,
//! call one pipeline function, print its report. Exit codes: 0 success,
//! 1 usage or validation failure, 2 I/O failure.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::data::{
    ingest_records, read_dataset, read_raw_records, split_by_diagram, write_dataset,
    Austenitization, Composition, JsonlError, ValidationError,
};
use crate::eval::{evaluate, read_fixtures, run_benchmark, BenchError};
use crate::io::{diagram_to_csv, load_bundle, render_svg, save_bundle, IoError};
use crate::oracle::{generate_synthetic_dataset, OracleError, OracleParams};
use crate::screen::{screen_dataset, drop_points, ScreenConfig, ScreenError};
use crate::stack::{
    consistency_diagnostic, generate_diagram, predict_point, train_stack, ModelBundle,
    StackConfig, StackError, DEFAULT_RATE_BOUNDS,
};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    FileAccess(String),
    #[error("I/O: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Jsonl(#[from] JsonlError),
    #[error(transparent)]
    Data(#[from] ValidationError),
    #[error(transparent)]
    Screen(#[from] ScreenError),
    #[error(transparent)]
    Stack(#[from] StackError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Bench(#[from] BenchError),
    #[error(transparent)]
    Archive(#[from] IoError),
    #[error("serialization: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) | CliError::FileAccess(_) => 2,
            CliError::Archive(IoError::Io(_)) => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "cct", version, about = "CCT diagram modeling toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate raw records into a dataset file.
    Ingest(IngestArgs),
    /// Screen a dataset with an autoencoder and drop the worst rows.
    Clean(CleanArgs),
    /// Split a dataset into train and test sets by diagram.
    Split(SplitArgs),
    /// Generate a synthetic dataset from the built-in reference process.
    Synth(SynthArgs),
    /// Train a model stack and save it as a bundle archive.
    Train(TrainArgs),
    /// Score a bundle on a held-out dataset.
    Eval(EvalArgs),
    /// Run a bundle over a benchmark fixture file.
    Bench(BenchArgs),
    /// Predict one alloy at one cooling rate.
    Predict(PredictArgs),
    /// Synthesize a full CCT diagram for one alloy.
    Diagram(DiagramArgs),
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// Raw records, one JSON object per line.
    #[arg(long)]
    pub input: PathBuf,
    /// Validated dataset destination.
    #[arg(long)]
    pub output: PathBuf,
    /// Fallback austenitization temperature (degC) for records missing one.
    #[arg(long)]
    pub default_aust_temp: Option<f64>,
}

#[derive(Debug, Args)]
pub struct CleanArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    /// Exact number of rows to drop.
    #[arg(long, conflicts_with = "remove_frac")]
    pub remove_count: Option<usize>,
    /// Fraction of rows to drop (default 0.02 when neither flag is given).
    #[arg(long)]
    pub remove_frac: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output_train: PathBuf,
    #[arg(long)]
    pub output_test: PathBuf,
    /// Fraction of diagrams held out for testing.
    #[arg(long, default_value_t = 0.10)]
    pub test_frac: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub output: PathBuf,
    /// Number of synthetic alloys (one diagram each).
    #[arg(long, default_value_t = 100)]
    pub alloys: usize,
    /// Cooling rates measured per diagram.
    #[arg(long, default_value_t = 10)]
    pub rates: usize,
    /// Gaussian noise added to every temperature (degC).
    #[arg(long, default_value_t = 5.0)]
    pub noise_sigma: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Training dataset.
    #[arg(long)]
    pub input: PathBuf,
    /// Bundle archive destination.
    #[arg(long)]
    pub output: PathBuf,
    /// Training configuration JSON; defaults are used when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Overrides the configuration seed.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub bundle: PathBuf,
    /// Held-out dataset to score on.
    #[arg(long)]
    pub input: PathBuf,
    /// Emit the full report as JSON instead of text.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long)]
    pub bundle: PathBuf,
    /// Benchmark fixture file (JSONL with a header line).
    #[arg(long)]
    pub fixtures: PathBuf,
    #[arg(long, default_value_t = 60)]
    pub n_rates: usize,
    /// Lower log10 cooling rate bound.
    #[arg(long, default_value_t = DEFAULT_RATE_BOUNDS.0)]
    pub rate_lo: f64,
    /// Upper log10 cooling rate bound.
    #[arg(long, default_value_t = DEFAULT_RATE_BOUNDS.1)]
    pub rate_hi: f64,
    /// Directory to write one SVG per fixture.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub bundle: PathBuf,
    /// Alloy composition, e.g. "C=0.4,Cr=1.05,Mn=0.7" (wt.%).
    #[arg(long)]
    pub composition: String,
    /// Austenitization temperature (degC).
    #[arg(long)]
    pub aust_temp: f64,
    /// Austenitization hold time (s).
    #[arg(long, default_value_t = 600.0)]
    pub aust_time: f64,
    /// Cooling rate in K/s.
    #[arg(long, conflicts_with = "log_rate")]
    pub rate: Option<f64>,
    /// log10 cooling rate.
    #[arg(long)]
    pub log_rate: Option<f64>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DiagramFormat {
    Svg,
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct DiagramArgs {
    #[arg(long)]
    pub bundle: PathBuf,
    /// Alloy composition, e.g. "C=0.4,Cr=1.05" (wt.%).
    #[arg(long)]
    pub composition: String,
    #[arg(long)]
    pub aust_temp: f64,
    #[arg(long, default_value_t = 600.0)]
    pub aust_time: f64,
    #[arg(long, default_value_t = 100)]
    pub n_rates: usize,
    #[arg(long, default_value_t = DEFAULT_RATE_BOUNDS.0)]
    pub rate_lo: f64,
    #[arg(long, default_value_t = DEFAULT_RATE_BOUNDS.1)]
    pub rate_hi: f64,
    #[arg(long, value_enum, default_value_t = DiagramFormat::Svg)]
    pub format: DiagramFormat,
    /// Destination file; stdout when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Also print the physics consistency diagnostic.
    #[arg(long)]
    pub diagnose: bool,
}

fn open_input(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| CliError::FileAccess(format!("cannot open {}: {e}", path.display())))
}

fn create_output(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::FileAccess(format!("cannot create {}: {e}", path.display())))
}

fn read_dataset_file(path: &Path) -> Result<crate::data::Dataset, CliError> {
    Ok(read_dataset(open_input(path)?)?)
}

fn load_bundle_file(path: &Path) -> Result<ModelBundle, CliError> {
    if !path.exists() {
        return Err(CliError::FileAccess(format!("bundle {} does not exist", path.display())));
    }
    Ok(load_bundle(path)?)
}

fn parse_composition(s: &str) -> Result<Composition, CliError> {
    Composition::parse(s).map_err(|e| CliError::Usage(format!("bad composition: {e}")))
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Ingest(a) => cmd_ingest(a),
        Command::Clean(a) => cmd_clean(a),
        Command::Split(a) => cmd_split(a),
        Command::Synth(a) => cmd_synth(a),
        Command::Train(a) => cmd_train(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Predict(a) => cmd_predict(a),
        Command::Diagram(a) => cmd_diagram(a),
    }
}

fn cmd_ingest(a: IngestArgs) -> Result<(), CliError> {
    let raws = read_raw_records(open_input(&a.input)?)?;
    let (dataset, report) = ingest_records(&raws, a.default_aust_temp)?;
    write_dataset(&dataset, create_output(&a.output)?)?;
    println!(
        "accepted {} of {} records ({} rejected, {} hold times imputed)",
        report.accepted,
        raws.len(),
        report.rejected.len(),
        report.imputed_times
    );
    for (line, w) in report.warnings.iter().take(10) {
        println!("  warning line {line}: {w}");
    }
    if report.warnings.len() > 10 {
        println!("  ... and {} more warnings", report.warnings.len() - 10);
    }
    for (line, e) in &report.rejected {
        println!("  rejected line {line}: {e}");
    }
    println!("wrote {}", a.output.display());
    Ok(())
}

fn cmd_clean(a: CleanArgs) -> Result<(), CliError> {
    let dataset = read_dataset_file(&a.input)?;
    let count = match (a.remove_count, a.remove_frac) {
        (Some(c), _) => c,
        (None, Some(f)) => {
            if !(0.0..1.0).contains(&f) {
                return Err(CliError::Usage(format!("--remove-frac must be in [0, 1), got {f}")));
            }
            (f * dataset.len() as f64).round() as usize
        }
        (None, None) => (0.02 * dataset.len() as f64).round() as usize,
    };
    let config = ScreenConfig { seed: a.seed, ..ScreenConfig::default() };
    let report = screen_dataset(&dataset, count, &config)?;
    let cleaned = drop_points(&dataset, &report.flagged)?;
    write_dataset(&cleaned, create_output(&a.output)?)?;
    println!(
        "screened {} rows ({} feature cells imputed), dropped {}:",
        dataset.len(),
        report.imputed,
        report.flagged.len()
    );
    for &i in &report.flagged {
        let p = &dataset.points()[i];
        println!(
            "  row {i} (diagram {}, log rate {:.2}) reconstruction error {:.4}",
            p.diagram_id, p.log_rate, report.errors[i]
        );
    }
    println!("wrote {} rows to {}", cleaned.len(), a.output.display());
    Ok(())
}

fn cmd_split(a: SplitArgs) -> Result<(), CliError> {
    let dataset = read_dataset_file(&a.input)?;
    let (train, test) = split_by_diagram(&dataset, a.test_frac, a.seed)?;
    write_dataset(&train, create_output(&a.output_train)?)?;
    write_dataset(&test, create_output(&a.output_test)?)?;
    println!(
        "train: {} rows / {} diagrams -> {}",
        train.len(),
        train.diagram_ids().len(),
        a.output_train.display()
    );
    println!(
        "test:  {} rows / {} diagrams -> {}",
        test.len(),
        test.diagram_ids().len(),
        a.output_test.display()
    );
    Ok(())
}

fn cmd_synth(a: SynthArgs) -> Result<(), CliError> {
    let params = OracleParams { seed: a.seed, noise_sigma: a.noise_sigma, ..OracleParams::default() };
    let dataset = generate_synthetic_dataset(&params, a.alloys, a.rates)?;
    write_dataset(&dataset, create_output(&a.output)?)?;
    println!(
        "generated {} rows across {} diagrams (noise sigma {}) -> {}",
        dataset.len(),
        a.alloys,
        a.noise_sigma,
        a.output.display()
    );
    Ok(())
}

fn cmd_train(a: TrainArgs) -> Result<(), CliError> {
    let dataset = read_dataset_file(&a.input)?;
    let mut config: StackConfig = match &a.config {
        Some(path) => serde_json::from_reader(open_input(path)?)
            .map_err(|e| CliError::Usage(format!("bad config {}: {e}", path.display())))?,
        None => StackConfig::default(),
    };
    if let Some(seed) = a.seed {
        config.seed = seed;
    }
    let bundle = train_stack(&dataset, &config)?;
    save_bundle(&bundle, &a.output)?;

    let d = &bundle.diagnostics;
    println!(
        "trained on {} measured rows (+{} augmented, +{} anchors), {} fraction rows",
        d.rows_measured, d.rows_augmented, d.rows_anchor, d.fraction_rows
    );
    for (id, label, err) in &d.chosen {
        match err {
            Some(e) => println!("  {id:?}: {label} (cv error {e:.4})"),
            None => println!("  {id:?}: {label}"),
        }
    }
    if !d.forced_constant.is_empty() {
        println!("  forced constant (too little data): {:?}", d.forced_constant);
    }
    if d.oof_fallbacks > 0 {
        println!("  {} stacked features fell back to final models", d.oof_fallbacks);
    }
    println!("wrote {}", a.output.display());
    Ok(())
}

fn cmd_eval(a: EvalArgs) -> Result<(), CliError> {
    let bundle = load_bundle_file(&a.bundle)?;
    let dataset = read_dataset_file(&a.input)?;
    let report = evaluate(&bundle, &dataset)?;
    if a.json {
        println!("{}", serde_json::to_string_pretty(&report)?);
    } else {
        print!("{}", report.render_text());
    }
    Ok(())
}

fn cmd_bench(a: BenchArgs) -> Result<(), CliError> {
    let bundle = load_bundle_file(&a.bundle)?;
    let (header, fixtures) = read_fixtures(open_input(&a.fixtures)?)?;
    let report = run_benchmark(&bundle, &header, &fixtures, a.n_rates, (a.rate_lo, a.rate_hi))?;
    if let Some(dir) = &a.out_dir {
        std::fs::create_dir_all(dir)?;
        for (row, diagram) in report.rows.iter().zip(&report.diagrams) {
            let path = dir.join(format!("{}.svg", row.id));
            std::fs::write(&path, render_svg(diagram)?)?;
        }
        println!("wrote {} diagrams to {}", report.diagrams.len(), dir.display());
    }
    if a.json {
        println!("{}", serde_json::to_string_pretty(&report)?);
    } else {
        print!("{}", report.render_text());
    }
    Ok(())
}

fn resolve_log_rate(rate: Option<f64>, log_rate: Option<f64>) -> Result<f64, CliError> {
    match (rate, log_rate) {
        (Some(r), None) if r > 0.0 => Ok(r.log10()),
        (Some(r), None) => Err(CliError::Usage(format!("--rate must be positive, got {r}"))),
        (None, Some(l)) => Ok(l),
        (None, None) => Err(CliError::Usage("provide --rate or --log-rate".into())),
        (Some(_), Some(_)) => unreachable!("clap conflicts_with"),
    }
}

fn cmd_predict(a: PredictArgs) -> Result<(), CliError> {
    let bundle = load_bundle_file(&a.bundle)?;
    let composition = parse_composition(&a.composition)?;
    let aust = Austenitization { temperature: a.aust_temp, time: a.aust_time, time_imputed: false };
    let log_rate = resolve_log_rate(a.rate, a.log_rate)?;
    let p = predict_point(&bundle, &composition, &aust, log_rate)?;
    if a.json {
        println!("{}", serde_json::to_string_pretty(&p)?);
        return Ok(());
    }
    println!("cooling at {:.3} K/s (log10 {:.3})", 10f64.powf(p.log_rate), p.log_rate);
    println!("Ac1 {:.1} degC, Ac3 {:.1} degC", p.ac1, p.ac3);
    for (k, phase) in crate::data::Phase::ALL.iter().enumerate() {
        if !p.present[k] {
            println!("  {:<10} absent", phase.name());
            continue;
        }
        let start = p.start[k].map(|v| format!("{v:.1}")).unwrap_or_else(|| "?".into());
        let finish = p.finish[k].map(|v| format!("{v:.1} degC")).unwrap_or_else(|| "-".into());
        println!(
            "  {:<10} start {start} degC, finish {finish}, fraction {:.3}",
            phase.name(),
            p.fractions[k]
        );
    }
    if p.override_applied {
        println!("  note: bainite retracted, ferrite and pearlite consume the austenite");
    }
    if p.clamp_applied {
        println!("  note: bainite finish clamped at the martensite start");
    }
    Ok(())
}

fn cmd_diagram(a: DiagramArgs) -> Result<(), CliError> {
    let bundle = load_bundle_file(&a.bundle)?;
    let composition = parse_composition(&a.composition)?;
    let aust = Austenitization { temperature: a.aust_temp, time: a.aust_time, time_imputed: false };
    let diagram = generate_diagram(&bundle, &composition, &aust, a.n_rates, (a.rate_lo, a.rate_hi))?;
    let rendered = match a.format {
        DiagramFormat::Svg => render_svg(&diagram)?,
        DiagramFormat::Csv => diagram_to_csv(&diagram)?,
        DiagramFormat::Json => serde_json::to_string_pretty(&diagram)?,
    };
    match &a.output {
        Some(path) => {
            let mut out = create_output(path)?;
            out.write_all(rendered.as_bytes())?;
            out.flush()?;
            println!("wrote {}", path.display());
        }
        None => print!("{rendered}"),
    }
    if a.diagnose {
        let d = consistency_diagnostic(&bundle, &composition, &aust, a.n_rates, (a.rate_lo, a.rate_hi))?;
        println!(
            "consistency at log rate {:.1}: Fs - Ac3 = {:.2}, Ps - Ac1 = {:.2}; {} overrides, {} clamps over {} rates",
            d.log_rate_anchor, d.fs_minus_ac3, d.ps_minus_ac1, d.override_count, d.clamp_count, d.n_rates
        );
    }
    Ok(())
}
