//! Literature benchmark fixtures.
//!
//! A fixture file is JSONL: a header line describing the corpus, then one
//! alloy per line with its composition, austenitization conditions (where
//! the source reported them), and the start-temperature errors the source
//! study itself reported against its measured diagram. Those reference
//! errors are context columns: the measured curves behind them are not
//! part of this corpus, so they cannot be recomputed here, only displayed
//! next to what the current model predicts.

use std::io::{BufRead, BufReader, Read};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{Austenitization, Composition, AUST_TEMP_ENVELOPE, AUST_TIME_ENVELOPE};
use crate::stack::{generate_diagram, CCTDiagram, ModelBundle, StackError};

pub const FIXTURE_KIND: &str = "cct-benchmark-fixtures";
pub const FIXTURE_SCHEMA: u32 = 1;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("fixture I/O: {0}")]
    Io(#[from] std::io::Error),
    #[error("fixture line {line}: {source}")]
    Parse {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("fixture header: {0}")]
    BadHeader(String),
    #[error("fixture `{id}`: {reason}")]
    BadFixture { id: String, reason: String },
    #[error(transparent)]
    Stack(#[from] StackError),
}

/// Start-temperature MAE (degC) a source study reported for one diagram.
/// Phases the study did not report stay `None`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ReferenceErrors {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub fs: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub ps: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub bs: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub ms: Option<f64>,
    /// Source tag, e.g. a bibliography key in the corpus notes.
    #[serde(default)]
    pub source: String,
}

impl ReferenceErrors {
    pub fn values(&self) -> [Option<f64>; 4] {
        [self.fs, self.ps, self.bs, self.ms]
    }

    fn validate(&self) -> Result<(), String> {
        for (v, name) in self.values().iter().zip(["fs", "ps", "bs", "ms"]) {
            if let Some(x) = v {
                if !(x.is_finite() && *x >= 0.0) {
                    return Err(format!("reference {name} must be a non-negative number, got {x}"));
                }
            }
        }
        Ok(())
    }
}

/// First line of a fixture file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixtureHeader {
    pub kind: String,
    pub schema: u32,
    #[serde(default)]
    pub description: String,
    /// What the per-fixture reference numbers mean.
    #[serde(default)]
    pub reference_label: String,
    /// Corpus-wide average of the reference errors, when the source
    /// collection published one.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub reference_average: Option<ReferenceErrors>,
}

/// One benchmark alloy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkFixture {
    pub id: String,
    pub composition: Composition,
    /// Austenitization temperature (degC); None when the source omitted it.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub aust_temp: Option<f64>,
    /// Austenitization hold time (s); None when the source omitted it.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub aust_time: Option<f64>,
    #[serde(default)]
    pub reference: ReferenceErrors,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub notes: Option<String>,
}

/// Reads and validates a fixture file.
pub fn read_fixtures<R: Read>(
    reader: R,
) -> Result<(FixtureHeader, Vec<BenchmarkFixture>), BenchError> {
    let mut lines = BufReader::new(reader).lines();
    let first = lines
        .next()
        .ok_or_else(|| BenchError::BadHeader("empty file".into()))??;
    let header: FixtureHeader =
        serde_json::from_str(&first).map_err(|e| BenchError::Parse { line: 1, source: e })?;
    if header.kind != FIXTURE_KIND {
        return Err(BenchError::BadHeader(format!(
            "expected kind `{FIXTURE_KIND}`, got `{}`",
            header.kind
        )));
    }
    if header.schema != FIXTURE_SCHEMA {
        return Err(BenchError::BadHeader(format!(
            "schema {} not supported, expected {FIXTURE_SCHEMA}",
            header.schema
        )));
    }

    let mut fixtures: Vec<BenchmarkFixture> = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let f: BenchmarkFixture = serde_json::from_str(&line)
            .map_err(|e| BenchError::Parse { line: i + 2, source: e })?;
        let bad = |reason: String| BenchError::BadFixture { id: f.id.clone(), reason };
        if f.id.is_empty() {
            return Err(BenchError::BadFixture {
                id: format!("line {}", i + 2),
                reason: "missing id".into(),
            });
        }
        if fixtures.iter().any(|g| g.id == f.id) {
            return Err(bad("duplicate id".into()));
        }
        if let Some(t) = f.aust_temp {
            if !(t.is_finite() && t > 0.0) {
                return Err(bad(format!("austenitization temperature {t} is not positive")));
            }
        }
        if let Some(t) = f.aust_time {
            if !(t.is_finite() && t > 0.0) {
                return Err(bad(format!("austenitization time {t} is not positive")));
            }
        }
        f.reference.validate().map_err(bad)?;
        fixtures.push(f);
    }
    if fixtures.is_empty() {
        return Err(BenchError::BadHeader("file has a header but no fixtures".into()));
    }
    Ok((header, fixtures))
}

/// Fills in austenitization conditions for every fixture. A missing
/// temperature takes the median of the temperatures the batch does
/// report, a missing hold time the mean of the reported times; when a
/// whole column is missing the envelope midpoint is the last resort.
/// Returns `(aust, temp_imputed)` per fixture; time imputation is flagged
/// on the `Austenitization` itself.
pub fn resolve_austenitization(fixtures: &[BenchmarkFixture]) -> Vec<(Austenitization, bool)> {
    let temps: Vec<f64> = fixtures.iter().filter_map(|f| f.aust_temp).collect();
    let times: Vec<f64> = fixtures.iter().filter_map(|f| f.aust_time).collect();

    let temp_default = median(&temps)
        .unwrap_or_else(|| 0.5 * (AUST_TEMP_ENVELOPE.lo + AUST_TEMP_ENVELOPE.hi));
    let time_default = mean(&times)
        .unwrap_or_else(|| 0.5 * (AUST_TIME_ENVELOPE.lo + AUST_TIME_ENVELOPE.hi));

    fixtures
        .iter()
        .map(|f| {
            let temp_imputed = f.aust_temp.is_none();
            let aust = Austenitization {
                temperature: f.aust_temp.unwrap_or(temp_default),
                time: f.aust_time.unwrap_or(time_default),
                time_imputed: f.aust_time.is_none(),
            };
            (aust, temp_imputed)
        })
        .collect()
}

fn mean(v: &[f64]) -> Option<f64> {
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

fn median(v: &[f64]) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    let mut s = v.to_vec();
    s.sort_by(|a, b| a.total_cmp(b));
    let mid = s.len() / 2;
    Some(if s.len() % 2 == 0 { 0.5 * (s[mid - 1] + s[mid]) } else { s[mid] })
}

/// One fixture's outcome in a benchmark run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRow {
    pub id: String,
    pub aust: Austenitization,
    pub temp_imputed: bool,
    /// Phase predicted present at any rate on the grid, F/P/B/M order.
    pub phases_found: [bool; 4],
    pub reference: ReferenceErrors,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub notes: Option<String>,
}

/// Full benchmark output: one row and one synthesized diagram per fixture.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub rows: Vec<BenchmarkRow>,
    pub diagrams: Vec<CCTDiagram>,
    pub n_rates: usize,
    pub rate_bounds: (f64, f64),
    pub reference_label: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub reference_average: Option<ReferenceErrors>,
}

/// Synthesizes a diagram for every fixture with `bundle`.
pub fn run_benchmark(
    bundle: &ModelBundle,
    header: &FixtureHeader,
    fixtures: &[BenchmarkFixture],
    n_rates: usize,
    rate_bounds: (f64, f64),
) -> Result<BenchmarkReport, BenchError> {
    if fixtures.is_empty() {
        return Err(BenchError::BadHeader("no fixtures to run".into()));
    }
    let resolved = resolve_austenitization(fixtures);
    let mut rows = Vec::with_capacity(fixtures.len());
    let mut diagrams = Vec::with_capacity(fixtures.len());
    for (f, (aust, temp_imputed)) in fixtures.iter().zip(resolved) {
        let diagram = generate_diagram(bundle, &f.composition, &aust, n_rates, rate_bounds)?;
        let mut phases_found = [false; 4];
        for p in &diagram.predictions {
            for k in 0..4 {
                phases_found[k] |= p.present[k];
            }
        }
        rows.push(BenchmarkRow {
            id: f.id.clone(),
            aust,
            temp_imputed,
            phases_found,
            reference: f.reference.clone(),
            notes: f.notes.clone(),
        });
        diagrams.push(diagram);
    }
    Ok(BenchmarkReport {
        rows,
        diagrams,
        n_rates,
        rate_bounds,
        reference_label: header.reference_label.clone(),
        reference_average: header.reference_average.clone(),
    })
}

impl BenchmarkReport {
    /// Plain-text table for terminals and logs. Imputed austenitization
    /// values are marked with `*`.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "benchmark over {} alloys, {} rates in log10 [{:.2}, {:.2}]\n\n",
            self.rows.len(),
            self.n_rates,
            self.rate_bounds.0,
            self.rate_bounds.1
        ));
        out.push_str(&format!(
            "{:<10} {:>9} {:>9}  {:<8} {}\n",
            "id", "T_aus", "t_aus", "phases", "reference start MAE (degC)"
        ));
        for r in &self.rows {
            let temp = format!("{:.0}{}", r.aust.temperature, if r.temp_imputed { "*" } else { " " });
            let time = format!("{:.0}{}", r.aust.time, if r.aust.time_imputed { "*" } else { " " });
            let phases: String = ["F", "P", "B", "M"]
                .iter()
                .zip(r.phases_found)
                .map(|(k, on)| if on { *k } else { "-" })
                .collect();
            out.push_str(&format!(
                "{:<10} {:>9} {:>9}  {:<8} {}\n",
                r.id,
                temp,
                time,
                phases,
                render_reference(&r.reference)
            ));
        }
        if let Some(avg) = &self.reference_average {
            out.push_str(&format!("\ncorpus reference average: {}\n", render_reference(avg)));
        }
        if !self.reference_label.is_empty() {
            out.push_str(&format!("reference columns: {}\n", self.reference_label));
        }
        out
    }
}

fn render_reference(r: &ReferenceErrors) -> String {
    let cell = |v: Option<f64>| match v {
        Some(x) => format!("{x:.1}"),
        None => "-".into(),
    };
    let mut s = format!(
        "Fs {:>5}  Ps {:>5}  Bs {:>5}  Ms {:>5}",
        cell(r.fs),
        cell(r.ps),
        cell(r.bs),
        cell(r.ms)
    );
    if !r.source.is_empty() {
        s.push_str(&format!("  [{}]", r.source));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Element;
    use crate::learners::{HyperParams, LearnerFamily, LearnerSpec, Task};
    use crate::nn::FractionConfig;
    use crate::oracle::{generate_synthetic_dataset, OracleParams};
    use crate::stack::{train_stack, StackConfig, DEFAULT_RATE_BOUNDS};

    const SAMPLE: &str = concat!(
        r#"{"kind":"cct-benchmark-fixtures","schema":1,"description":"two alloys","reference_label":"as reported","reference_average":{"fs":10.0,"ms":5.0,"source":"avg"}}"#,
        "\n",
        r#"{"id":"a","composition":{"C":0.2,"Mn":1.0},"aust_temp":900.0,"aust_time":600.0,"reference":{"fs":12.0,"source":"x"}}"#,
        "\n\n",
        r#"{"id":"b","composition":{"C":0.4,"Cr":1.2},"aust_time":300.0,"reference":{"ms":4.0}}"#,
        "\n",
    );

    #[test]
    fn parses_header_and_fixtures() {
        let (header, fixtures) = read_fixtures(SAMPLE.as_bytes()).unwrap();
        assert_eq!(header.schema, FIXTURE_SCHEMA);
        assert_eq!(header.reference_average.as_ref().unwrap().fs, Some(10.0));
        assert_eq!(fixtures.len(), 2);
        assert_eq!(fixtures[0].composition.get(Element::Mn), 1.0);
        assert_eq!(fixtures[0].reference.fs, Some(12.0));
        assert_eq!(fixtures[1].aust_temp, None);
        assert_eq!(fixtures[1].reference.ms, Some(4.0));
    }

    #[test]
    fn rejects_wrong_kind_schema_and_bad_rows() {
        let wrong_kind = r#"{"kind":"something-else","schema":1}"#;
        assert!(matches!(read_fixtures(wrong_kind.as_bytes()), Err(BenchError::BadHeader(_))));

        let wrong_schema = r#"{"kind":"cct-benchmark-fixtures","schema":99}"#;
        assert!(matches!(read_fixtures(wrong_schema.as_bytes()), Err(BenchError::BadHeader(_))));

        let header_only = r#"{"kind":"cct-benchmark-fixtures","schema":1}"#;
        assert!(matches!(read_fixtures(header_only.as_bytes()), Err(BenchError::BadHeader(_))));

        let dup = format!(
            "{}\n{}\n{}\n",
            r#"{"kind":"cct-benchmark-fixtures","schema":1}"#,
            r#"{"id":"a","composition":{"C":0.2}}"#,
            r#"{"id":"a","composition":{"C":0.3}}"#
        );
        assert!(matches!(read_fixtures(dup.as_bytes()), Err(BenchError::BadFixture { .. })));

        let negative_temp = format!(
            "{}\n{}\n",
            r#"{"kind":"cct-benchmark-fixtures","schema":1}"#,
            r#"{"id":"a","composition":{"C":0.2},"aust_temp":-5.0}"#
        );
        assert!(matches!(
            read_fixtures(negative_temp.as_bytes()),
            Err(BenchError::BadFixture { .. })
        ));

        let bad_json = format!(
            "{}\n{}\n",
            r#"{"kind":"cct-benchmark-fixtures","schema":1}"#,
            r#"{"id":"a", nope}"#
        );
        assert!(matches!(
            read_fixtures(bad_json.as_bytes()),
            Err(BenchError::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn imputes_missing_austenitization_from_the_batch() {
        let (_, fixtures) = read_fixtures(SAMPLE.as_bytes()).unwrap();
        let resolved = resolve_austenitization(&fixtures);
        // Fixture `a` is fully specified.
        assert_eq!(resolved[0].0.temperature, 900.0);
        assert!(!resolved[0].1);
        assert!(!resolved[0].0.time_imputed);
        // Fixture `b` misses its temperature; the only reported one is 900.
        assert_eq!(resolved[1].0.temperature, 900.0);
        assert!(resolved[1].1);
        assert_eq!(resolved[1].0.time, 300.0);
    }

    #[test]
    fn runs_diagrams_for_every_fixture() {
        let params = OracleParams { seed: 12, noise_sigma: 0.0, ..OracleParams::default() };
        let data = generate_synthetic_dataset(&params, 9, 6).unwrap();
        let spec = |task| LearnerSpec {
            family: LearnerFamily::Knn,
            task,
            hyper: HyperParams { k: 5, ..HyperParams::default() },
            seed: 0,
        };
        let config = StackConfig {
            min_rows: 4,
            classify_grid: vec![spec(Task::Classify)],
            regress_grid: vec![spec(Task::Regress)],
            fraction_net: FractionConfig { hidden: 8, max_epochs: 30, ..FractionConfig::default() },
            ..StackConfig::seeded(3)
        };
        let bundle = train_stack(&data, &config).unwrap();

        let (header, fixtures) = read_fixtures(SAMPLE.as_bytes()).unwrap();
        let report = run_benchmark(&bundle, &header, &fixtures, 8, DEFAULT_RATE_BOUNDS).unwrap();
        assert_eq!(report.rows.len(), 2);
        assert_eq!(report.diagrams.len(), 2);
        assert_eq!(report.diagrams[0].predictions.len(), 8);
        for d in &report.diagrams {
            for p in &d.predictions {
                assert!(p.invariant_violations().is_empty());
            }
        }
        let text = report.render_text();
        assert!(text.contains("corpus reference average"));
        assert!(text.contains("900*"), "imputed temperature should be starred:\n{text}");
    }
}
