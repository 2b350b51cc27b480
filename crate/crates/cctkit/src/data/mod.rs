//! Core domain types: alloy compositions, austenitization conditions,
//! per-phase transformation records and validated datasets.
//!
//! A [`DataPoint`] is one digitized cooling curve of one CCT diagram: an
//! alloy, an austenitization state, a cooling rate, and what was observed
//! along that curve. Points that share a `diagram_id` come from the same
//! physical diagram and must never straddle a train/test split.

mod envelope;
mod jsonl;
mod scale;
mod split;

pub use envelope::{element_envelope, Envelope, AUST_TEMP_ENVELOPE, AUST_TIME_ENVELOPE, LOG_RATE_ENVELOPE};
pub use jsonl::{read_dataset, read_raw_records, write_dataset, JsonlError};
pub use scale::{QuantileScaler, StandardScaler};
pub use split::{assign_diagram_folds, split_by_diagram};

use std::collections::BTreeMap;
use std::fmt;

use serde::de::{MapAccess, Visitor};
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::matrix::Matrix;

/// Alloying elements tracked per record, in canonical feature order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Element {
    C,
    Mn,
    Si,
    Cr,
    Mo,
    S,
    P,
    Ni,
    Al,
    Cu,
    Nb,
    V,
    W,
    Co,
    N,
    Ti,
    B,
}

impl Element {
    pub const ALL: [Element; 17] = [
        Element::C,
        Element::Mn,
        Element::Si,
        Element::Cr,
        Element::Mo,
        Element::S,
        Element::P,
        Element::Ni,
        Element::Al,
        Element::Cu,
        Element::Nb,
        Element::V,
        Element::W,
        Element::Co,
        Element::N,
        Element::Ti,
        Element::B,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            Element::C => "C",
            Element::Mn => "Mn",
            Element::Si => "Si",
            Element::Cr => "Cr",
            Element::Mo => "Mo",
            Element::S => "S",
            Element::P => "P",
            Element::Ni => "Ni",
            Element::Al => "Al",
            Element::Cu => "Cu",
            Element::Nb => "Nb",
            Element::V => "V",
            Element::W => "W",
            Element::Co => "Co",
            Element::N => "N",
            Element::Ti => "Ti",
            Element::B => "B",
        }
    }

    pub fn from_symbol(s: &str) -> Option<Element> {
        Element::ALL.iter().copied().find(|e| e.symbol() == s)
    }

    fn index(self) -> usize {
        Element::ALL.iter().position(|&e| e == self).unwrap()
    }
}

/// Alloy composition in weight percent. Elements not listed are zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Composition {
    wt: [f64; 17],
}

impl Default for Composition {
    fn default() -> Self {
        Composition { wt: [0.0; 17] }
    }
}

impl Composition {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs(pairs: &[(Element, f64)]) -> Self {
        let mut c = Composition::new();
        for &(e, v) in pairs {
            c.set(e, v);
        }
        c
    }

    pub fn get(&self, e: Element) -> f64 {
        self.wt[e.index()]
    }

    pub fn set(&mut self, e: Element, v: f64) {
        self.wt[e.index()] = v;
    }

    /// Sum of all listed element contents (balance is iron).
    pub fn sum(&self) -> f64 {
        self.wt.iter().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Element, f64)> + '_ {
        Element::ALL.iter().map(move |&e| (e, self.get(e)))
    }

    /// Parses a `Sym=val,Sym=val` string. Symbols match case-insensitively.
    pub fn parse(s: &str) -> Result<Composition, ValidationError> {
        let mut c = Composition::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (sym, val) = part.split_once('=').ok_or_else(|| ValidationError::InvalidValue {
                field: "composition".into(),
                reason: format!("expected `Sym=value`, got `{part}`"),
            })?;
            let sym = sym.trim();
            let element = Element::ALL
                .iter()
                .copied()
                .find(|e| e.symbol().eq_ignore_ascii_case(sym))
                .ok_or_else(|| ValidationError::InvalidValue {
                    field: "composition".into(),
                    reason: format!("unknown element symbol `{sym}`"),
                })?;
            let v: f64 = val.trim().parse().map_err(|_| ValidationError::InvalidValue {
                field: format!("composition.{}", element.symbol()),
                reason: format!("`{}` is not a number", val.trim()),
            })?;
            c.set(element, v);
        }
        Ok(c)
    }
}

impl Serialize for Composition {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(None)?;
        for (e, v) in self.iter() {
            if v != 0.0 {
                map.serialize_entry(e.symbol(), &v)?;
            }
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for Composition {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct CompVisitor;
        impl<'de> Visitor<'de> for CompVisitor {
            type Value = Composition;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a map of element symbols to weight percents")
            }
            fn visit_map<A: MapAccess<'de>>(self, mut access: A) -> Result<Self::Value, A::Error> {
                let mut c = Composition::new();
                while let Some((key, value)) = access.next_entry::<String, f64>()? {
                    let e = Element::from_symbol(&key).ok_or_else(|| {
                        serde::de::Error::custom(format!("unknown element symbol `{key}`"))
                    })?;
                    c.set(e, value);
                }
                Ok(c)
            }
        }
        deserializer.deserialize_map(CompVisitor)
    }
}

/// Austenitization condition prior to cooling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Austenitization {
    /// Temperature in degrees Celsius.
    pub temperature: f64,
    /// Hold time in seconds.
    pub time: f64,
    /// True when the hold time was filled in from the dataset mean.
    #[serde(default)]
    pub time_imputed: bool,
}

/// Product phases, in canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    Ferrite,
    Pearlite,
    Bainite,
    Martensite,
}

impl Phase {
    pub const ALL: [Phase; 4] = [Phase::Ferrite, Phase::Pearlite, Phase::Bainite, Phase::Martensite];

    pub fn key(self) -> &'static str {
        match self {
            Phase::Ferrite => "F",
            Phase::Pearlite => "P",
            Phase::Bainite => "B",
            Phase::Martensite => "M",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Phase::Ferrite => "ferrite",
            Phase::Pearlite => "pearlite",
            Phase::Bainite => "bainite",
            Phase::Martensite => "martensite",
        }
    }

    pub fn from_key(s: &str) -> Option<Phase> {
        Phase::ALL.iter().copied().find(|p| p.key() == s)
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl Serialize for Phase {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.key())
    }
}

impl<'de> Deserialize<'de> for Phase {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Phase::from_key(&s)
            .ok_or_else(|| serde::de::Error::custom(format!("unknown phase key `{s}`")))
    }
}

/// What was observed for one phase along one cooling curve.
///
/// `range_temp` is the start-to-finish width, so finish = start - range.
/// Martensite carries no range (its finish is not digitized). An absent
/// phase carries no temperatures and a fraction of zero, if any.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PhaseRecord {
    pub present: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub start_temp: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub range_temp: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub fraction: Option<f64>,
}

impl PhaseRecord {
    pub fn absent() -> Self {
        PhaseRecord::default()
    }

    pub fn finish_temp(&self) -> Option<f64> {
        match (self.start_temp, self.range_temp) {
            (Some(s), Some(r)) => Some(s - r),
            _ => None,
        }
    }
}

/// Serde adapter storing `[PhaseRecord; 4]` as a `{"F": .., "P": .., ..}` map.
mod phase_map {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[PhaseRecord; 4], s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(4))?;
        for p in Phase::ALL {
            map.serialize_entry(p.key(), &v[p.index()])?;
        }
        map.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<[PhaseRecord; 4], D::Error> {
        let raw: BTreeMap<String, PhaseRecord> = BTreeMap::deserialize(d)?;
        let mut out = [PhaseRecord::absent(); 4];
        for (k, v) in raw {
            let p = Phase::from_key(&k)
                .ok_or_else(|| serde::de::Error::custom(format!("unknown phase key `{k}`")))?;
            out[p.index()] = v;
        }
        Ok(out)
    }
}

/// One digitized cooling curve of one CCT diagram.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataPoint {
    pub diagram_id: String,
    pub composition: Composition,
    pub aust: Austenitization,
    /// log10 of the cooling rate in K/s.
    pub log_rate: f64,
    #[serde(with = "phase_map")]
    pub phases: [PhaseRecord; 4],
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub ac1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub ac3: Option<f64>,
    /// True for rows injected by augmentation or anchoring, never measured.
    #[serde(default)]
    pub synthetic: bool,
}

impl DataPoint {
    pub fn phase(&self, p: Phase) -> &PhaseRecord {
        &self.phases[p.index()]
    }

    /// Base feature vector: 17 element contents, austenitization
    /// temperature and time, log10 cooling rate.
    pub fn features(&self) -> Vec<f64> {
        let mut f = Vec::with_capacity(FEATURE_NAMES.len());
        for (_, v) in self.composition.iter() {
            f.push(v);
        }
        f.push(self.aust.temperature);
        f.push(self.aust.time);
        f.push(self.log_rate);
        f
    }
}

/// Names of the base feature columns, matching [`DataPoint::features`].
pub const FEATURE_NAMES: [&str; 20] = [
    "C", "Mn", "Si", "Cr", "Mo", "S", "P", "Ni", "Al", "Cu", "Nb", "V", "W", "Co", "N", "Ti", "B",
    "aust_temp", "aust_time", "log_rate",
];

/// Column means and standard deviations over the measured (non-synthetic)
/// points of a dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureStats {
    pub names: Vec<String>,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    /// Number of measured points the stats were computed from.
    pub count: usize,
}

/// A validated collection of data points plus base-feature statistics.
///
/// Feature statistics always come from measured points only, so injected
/// synthetic rows never shift the scaling.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    points: Vec<DataPoint>,
    feature_stats: FeatureStats,
}

impl Dataset {
    pub fn new(points: Vec<DataPoint>) -> Result<Self, ValidationError> {
        let n_real = points.iter().filter(|p| !p.synthetic).count();
        if n_real == 0 {
            return Err(ValidationError::EmptyDataset);
        }
        let cols = FEATURE_NAMES.len();
        let mut mean = vec![0.0; cols];
        for p in points.iter().filter(|p| !p.synthetic) {
            for (m, v) in mean.iter_mut().zip(p.features()) {
                *m += v;
            }
        }
        for m in mean.iter_mut() {
            *m /= n_real as f64;
        }
        let mut var = vec![0.0; cols];
        for p in points.iter().filter(|p| !p.synthetic) {
            for ((s, m), v) in var.iter_mut().zip(&mean).zip(p.features()) {
                let d = v - m;
                *s += d * d;
            }
        }
        let std: Vec<f64> = var.iter().map(|s| (s / n_real as f64).sqrt()).collect();
        Ok(Dataset {
            points,
            feature_stats: FeatureStats {
                names: FEATURE_NAMES.iter().map(|s| s.to_string()).collect(),
                mean,
                std,
                count: n_real,
            },
        })
    }

    pub fn points(&self) -> &[DataPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn feature_stats(&self) -> &FeatureStats {
        &self.feature_stats
    }

    /// Distinct diagram ids in first-appearance order.
    pub fn diagram_ids(&self) -> Vec<&str> {
        let mut seen = std::collections::HashSet::new();
        let mut out = Vec::new();
        for p in &self.points {
            if seen.insert(p.diagram_id.as_str()) {
                out.push(p.diagram_id.as_str());
            }
        }
        out
    }

    /// Base features of every point, one row per point.
    pub fn feature_matrix(&self) -> Matrix {
        let mut m = Matrix::zeros(0, 0);
        for p in &self.points {
            m.push_row(&p.features());
        }
        m
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ValidationError {
    #[error("missing required field `{0}`")]
    MissingField(String),
    #[error("field `{field}` must be non-negative, got {value}")]
    NegativeValue { field: String, value: f64 },
    #[error("field `{field}` is not a finite number")]
    NonFiniteNumber { field: String },
    #[error("field `{field}` is invalid: {reason}")]
    InvalidValue { field: String, reason: String },
    #[error("dataset contains no valid measured points")]
    EmptyDataset,
    #[error("need at least {needed} distinct diagrams, found {found}")]
    TooFewDiagrams { found: usize, needed: usize },
    #[error("expected {expected} feature columns, got {got}")]
    WidthMismatch { expected: usize, got: usize },
    #[error("split fraction must lie strictly between 0 and 1, got {0}")]
    BadSplitFraction(f64),
    #[error("unsupported dataset schema version {found}, expected {expected}")]
    SchemaVersion { found: u32, expected: u32 },
}

/// A non-fatal data quality note attached to an accepted record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationWarning {
    pub field: String,
    pub message: String,
}

impl fmt::Display for ValidationWarning {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

/// One record as exported by diagram digitization, before validation.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct RawRecord {
    #[serde(default)]
    pub diagram_id: Option<String>,
    #[serde(default)]
    pub composition: Option<Composition>,
    #[serde(default)]
    pub aust_temp: Option<f64>,
    #[serde(default)]
    pub aust_time: Option<f64>,
    /// Cooling rate in K/s; alternative to `log_rate`.
    #[serde(default)]
    pub rate: Option<f64>,
    #[serde(default)]
    pub log_rate: Option<f64>,
    #[serde(default)]
    pub phases: Option<BTreeMap<String, PhaseRecord>>,
    #[serde(default)]
    pub ac1: Option<f64>,
    #[serde(default)]
    pub ac3: Option<f64>,
}

/// Fallback values used to fill optional fields during validation.
#[derive(Debug, Clone, Copy, Default)]
pub struct ImputeContext {
    /// Mean austenitization hold time of records that do carry one.
    pub mean_aust_time: Option<f64>,
    /// Optional fallback austenitization temperature for records missing
    /// one (off unless explicitly supplied at ingest).
    pub default_aust_temp: Option<f64>,
}

fn check_finite(field: &str, v: f64) -> Result<(), ValidationError> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(ValidationError::NonFiniteNumber { field: field.to_string() })
    }
}

/// Validates one raw record into a [`DataPoint`].
///
/// Hard violations (missing required fields, negative contents, non-finite
/// numbers, inconsistent temperatures) are errors. Values outside the
/// supported envelope are accepted with warnings.
pub fn validate_record(
    raw: &RawRecord,
    ctx: &ImputeContext,
) -> Result<(DataPoint, Vec<ValidationWarning>), ValidationError> {
    let mut warnings = Vec::new();

    let diagram_id = raw
        .diagram_id
        .as_deref()
        .filter(|s| !s.trim().is_empty())
        .ok_or_else(|| ValidationError::MissingField("diagram_id".into()))?
        .to_string();

    let composition = raw
        .composition
        .ok_or_else(|| ValidationError::MissingField("composition".into()))?;
    for (e, v) in composition.iter() {
        let field = format!("composition.{}", e.symbol());
        check_finite(&field, v)?;
        if v < 0.0 {
            return Err(ValidationError::NegativeValue { field, value: v });
        }
        if v > 0.0 {
            let env = element_envelope(e);
            if !env.contains(v) {
                warnings.push(ValidationWarning {
                    field,
                    message: format!("{v} wt% is outside the supported range {env}"),
                });
            }
        }
    }
    if composition.sum() >= 100.0 {
        return Err(ValidationError::InvalidValue {
            field: "composition".into(),
            reason: format!("element sum {:.2} wt% leaves no iron balance", composition.sum()),
        });
    }

    let temperature = match raw.aust_temp.or(ctx.default_aust_temp) {
        Some(t) => t,
        None => return Err(ValidationError::MissingField("aust_temp".into())),
    };
    check_finite("aust_temp", temperature)?;
    if temperature <= 0.0 {
        return Err(ValidationError::InvalidValue {
            field: "aust_temp".into(),
            reason: format!("austenitization temperature must be positive, got {temperature}"),
        });
    }
    if !AUST_TEMP_ENVELOPE.contains(temperature) {
        warnings.push(ValidationWarning {
            field: "aust_temp".into(),
            message: format!("{temperature} degC is outside the supported range {AUST_TEMP_ENVELOPE}"),
        });
    }

    let (time, time_imputed) = match raw.aust_time {
        Some(t) => {
            check_finite("aust_time", t)?;
            if t <= 0.0 {
                return Err(ValidationError::InvalidValue {
                    field: "aust_time".into(),
                    reason: format!("hold time must be positive, got {t}"),
                });
            }
            (t, false)
        }
        None => match ctx.mean_aust_time {
            Some(m) => (m, true),
            None => return Err(ValidationError::MissingField("aust_time".into())),
        },
    };
    if !AUST_TIME_ENVELOPE.contains(time) {
        warnings.push(ValidationWarning {
            field: "aust_time".into(),
            message: format!("{time} s is outside the supported range {AUST_TIME_ENVELOPE}"),
        });
    }

    let log_rate = match (raw.log_rate, raw.rate) {
        (Some(lr), _) => {
            check_finite("log_rate", lr)?;
            lr
        }
        (None, Some(r)) => {
            check_finite("rate", r)?;
            if r <= 0.0 {
                return Err(ValidationError::NegativeValue { field: "rate".into(), value: r });
            }
            r.log10()
        }
        (None, None) => return Err(ValidationError::MissingField("rate".into())),
    };
    if !LOG_RATE_ENVELOPE.contains(log_rate) {
        warnings.push(ValidationWarning {
            field: "log_rate".into(),
            message: format!("{log_rate:.3} is outside the supported range {LOG_RATE_ENVELOPE}"),
        });
    }

    let raw_phases = match &raw.phases {
        Some(m) if !m.is_empty() => m,
        _ => return Err(ValidationError::MissingField("phases".into())),
    };
    let mut phases = [PhaseRecord::absent(); 4];
    for (key, rec) in raw_phases {
        let phase = Phase::from_key(key).ok_or_else(|| ValidationError::InvalidValue {
            field: "phases".into(),
            reason: format!("unknown phase key `{key}`"),
        })?;
        phases[phase.index()] = validate_phase_record(phase, rec, temperature)?;
    }

    let fraction_sum: f64 = phases.iter().filter_map(|p| p.fraction).sum();
    if fraction_sum > 1.0 + 1e-6 {
        return Err(ValidationError::InvalidValue {
            field: "phases".into(),
            reason: format!("phase fractions sum to {fraction_sum:.6}, above 1"),
        });
    }

    for (field, v) in [("ac1", raw.ac1), ("ac3", raw.ac3)] {
        if let Some(t) = v {
            check_finite(field, t)?;
            if t <= 0.0 {
                return Err(ValidationError::InvalidValue {
                    field: field.into(),
                    reason: format!("critical temperature must be positive, got {t}"),
                });
            }
        }
    }
    if let (Some(a1), Some(a3)) = (raw.ac1, raw.ac3) {
        if a1 > a3 {
            warnings.push(ValidationWarning {
                field: "ac1".into(),
                message: format!("Ac1 {a1} degC above Ac3 {a3} degC; digitization suspect"),
            });
        }
    }

    Ok((
        DataPoint {
            diagram_id,
            composition,
            aust: Austenitization { temperature, time, time_imputed },
            log_rate,
            phases,
            ac1: raw.ac1,
            ac3: raw.ac3,
            synthetic: false,
        },
        warnings,
    ))
}

fn validate_phase_record(
    phase: Phase,
    rec: &PhaseRecord,
    aust_temp: f64,
) -> Result<PhaseRecord, ValidationError> {
    let key = phase.key();
    if !rec.present {
        let has_temps = rec.start_temp.is_some() || rec.range_temp.is_some();
        let has_fraction = rec.fraction.is_some_and(|f| f != 0.0);
        if has_temps || has_fraction {
            return Err(ValidationError::InvalidValue {
                field: format!("phases.{key}"),
                reason: "absent phase carries temperatures or a nonzero fraction".into(),
            });
        }
        return Ok(PhaseRecord { present: false, start_temp: None, range_temp: None, fraction: rec.fraction });
    }

    if let Some(s) = rec.start_temp {
        check_finite(&format!("phases.{key}.start_temp"), s)?;
        if s <= 0.0 {
            return Err(ValidationError::InvalidValue {
                field: format!("phases.{key}.start_temp"),
                reason: format!("start temperature must be positive, got {s}"),
            });
        }
        if s >= aust_temp {
            return Err(ValidationError::InvalidValue {
                field: format!("phases.{key}.start_temp"),
                reason: format!("start {s} degC not below austenitization {aust_temp} degC"),
            });
        }
    }

    if let Some(r) = rec.range_temp {
        if phase == Phase::Martensite {
            return Err(ValidationError::InvalidValue {
                field: format!("phases.{key}.range_temp"),
                reason: "martensite records no finish temperature".into(),
            });
        }
        check_finite(&format!("phases.{key}.range_temp"), r)?;
        if r < 0.0 {
            return Err(ValidationError::NegativeValue {
                field: format!("phases.{key}.range_temp"),
                value: r,
            });
        }
        if let Some(s) = rec.start_temp {
            if r > s {
                return Err(ValidationError::InvalidValue {
                    field: format!("phases.{key}.range_temp"),
                    reason: format!("range {r} degC puts the finish below 0 degC (start {s})"),
                });
            }
        }
    }

    if let Some(f) = rec.fraction {
        check_finite(&format!("phases.{key}.fraction"), f)?;
        if f < 0.0 {
            return Err(ValidationError::NegativeValue {
                field: format!("phases.{key}.fraction"),
                value: f,
            });
        }
        if f > 1.0 {
            return Err(ValidationError::InvalidValue {
                field: format!("phases.{key}.fraction"),
                reason: format!("fraction {f} exceeds 1"),
            });
        }
    }

    Ok(*rec)
}

/// Outcome summary of a batch ingest.
#[derive(Debug, Clone, Default, Serialize)]
pub struct IngestReport {
    pub accepted: usize,
    pub imputed_times: usize,
    /// (input line number, warning) pairs; line numbers are 1-based.
    pub warnings: Vec<(usize, ValidationWarning)>,
    /// (input line number, error message) pairs for rejected records.
    pub rejected: Vec<(usize, String)>,
}

/// Validates a batch of raw records into a dataset.
///
/// Hold times missing from individual records are imputed with the mean
/// hold time of the records that carry one. Rejected records are reported,
/// not fatal, unless nothing survives.
pub fn ingest_records(
    raws: &[RawRecord],
    default_aust_temp: Option<f64>,
) -> Result<(Dataset, IngestReport), ValidationError> {
    let times: Vec<f64> = raws
        .iter()
        .filter_map(|r| r.aust_time)
        .filter(|t| t.is_finite() && *t > 0.0)
        .collect();
    let ctx = ImputeContext {
        mean_aust_time: if times.is_empty() {
            None
        } else {
            Some(times.iter().sum::<f64>() / times.len() as f64)
        },
        default_aust_temp,
    };

    let mut report = IngestReport::default();
    let mut points = Vec::with_capacity(raws.len());
    for (i, raw) in raws.iter().enumerate() {
        let line = i + 1;
        match validate_record(raw, &ctx) {
            Ok((point, warns)) => {
                if point.aust.time_imputed {
                    report.imputed_times += 1;
                }
                report.warnings.extend(warns.into_iter().map(|w| (line, w)));
                points.push(point);
            }
            Err(e) => report.rejected.push((line, e.to_string())),
        }
    }
    report.accepted = points.len();
    let dataset = Dataset::new(points)?;
    Ok((dataset, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn raw_ok() -> RawRecord {
        let mut phases = BTreeMap::new();
        phases.insert(
            "F".into(),
            PhaseRecord { present: true, start_temp: Some(760.0), range_temp: Some(60.0), fraction: Some(0.4) },
        );
        phases.insert(
            "M".into(),
            PhaseRecord { present: true, start_temp: Some(410.0), range_temp: None, fraction: Some(0.6) },
        );
        RawRecord {
            diagram_id: Some("d1".into()),
            composition: Some(Composition::from_pairs(&[(Element::C, 0.4), (Element::Mn, 1.2)])),
            aust_temp: Some(900.0),
            aust_time: Some(1800.0),
            rate: Some(10.0),
            log_rate: None,
            phases: Some(phases),
            ac1: Some(720.0),
            ac3: Some(810.0),
        }
    }

    #[test]
    fn accepts_clean_record() {
        let (p, warns) = validate_record(&raw_ok(), &ImputeContext::default()).unwrap();
        assert!(warns.is_empty());
        assert_eq!(p.log_rate, 10.0f64.log10());
        assert!(p.phase(Phase::Ferrite).present);
        assert_eq!(p.phase(Phase::Ferrite).finish_temp(), Some(700.0));
        assert!(!p.phase(Phase::Pearlite).present);
        assert!(!p.synthetic);
    }

    #[test]
    fn missing_composition_is_fatal() {
        let mut raw = raw_ok();
        raw.composition = None;
        let err = validate_record(&raw, &ImputeContext::default()).unwrap_err();
        assert_eq!(err, ValidationError::MissingField("composition".into()));
    }

    #[test]
    fn negative_rate_is_fatal() {
        let mut raw = raw_ok();
        raw.rate = Some(-2.0);
        let err = validate_record(&raw, &ImputeContext::default()).unwrap_err();
        assert!(matches!(err, ValidationError::NegativeValue { .. }));
    }

    #[test]
    fn nonfinite_start_is_fatal() {
        let mut raw = raw_ok();
        raw.phases.as_mut().unwrap().get_mut("F").unwrap().start_temp = Some(f64::NAN);
        let err = validate_record(&raw, &ImputeContext::default()).unwrap_err();
        assert!(matches!(err, ValidationError::NonFiniteNumber { .. }));
    }

    #[test]
    fn out_of_envelope_content_warns_but_passes() {
        let mut raw = raw_ok();
        raw.composition.as_mut().unwrap().set(Element::C, 4.2);
        let (_, warns) = validate_record(&raw, &ImputeContext::default()).unwrap();
        assert_eq!(warns.len(), 1);
        assert_eq!(warns[0].field, "composition.C");
    }

    #[test]
    fn start_above_aust_temp_is_fatal() {
        let mut raw = raw_ok();
        raw.phases.as_mut().unwrap().get_mut("F").unwrap().start_temp = Some(950.0);
        let err = validate_record(&raw, &ImputeContext::default()).unwrap_err();
        assert!(matches!(err, ValidationError::InvalidValue { .. }));
    }

    #[test]
    fn absent_phase_with_temps_is_fatal() {
        let mut raw = raw_ok();
        raw.phases.as_mut().unwrap().insert(
            "P".into(),
            PhaseRecord { present: false, start_temp: Some(650.0), ..Default::default() },
        );
        assert!(validate_record(&raw, &ImputeContext::default()).is_err());
    }

    #[test]
    fn martensite_range_is_fatal() {
        let mut raw = raw_ok();
        raw.phases.as_mut().unwrap().get_mut("M").unwrap().range_temp = Some(50.0);
        assert!(validate_record(&raw, &ImputeContext::default()).is_err());
    }

    #[test]
    fn fraction_sum_above_one_is_fatal() {
        let mut raw = raw_ok();
        raw.phases.as_mut().unwrap().get_mut("F").unwrap().fraction = Some(0.9);
        assert!(validate_record(&raw, &ImputeContext::default()).is_err());
    }

    #[test]
    fn hold_time_imputation_flags_point() {
        let mut missing = raw_ok();
        missing.aust_time = None;
        let (ds, report) = ingest_records(&[raw_ok(), missing], None).unwrap();
        assert_eq!(report.accepted, 2);
        assert_eq!(report.imputed_times, 1);
        assert!(ds.points()[1].aust.time_imputed);
        assert_eq!(ds.points()[1].aust.time, 1800.0);
    }

    #[test]
    fn feature_stats_skip_synthetic_points() {
        let (p, _) = validate_record(&raw_ok(), &ImputeContext::default()).unwrap();
        let mut q = p.clone();
        q.synthetic = true;
        q.log_rate = 1000.0;
        let ds = Dataset::new(vec![p.clone(), q]).unwrap();
        let only_real = Dataset::new(vec![p]).unwrap();
        assert_eq!(ds.feature_stats(), only_real.feature_stats());
        assert_eq!(ds.feature_stats().count, 1);
    }

    #[test]
    fn composition_json_roundtrip_skips_zeros() {
        let c = Composition::from_pairs(&[(Element::C, 0.4), (Element::Cr, 1.1)]);
        let s = serde_json::to_string(&c).unwrap();
        assert_eq!(s, r#"{"C":0.4,"Cr":1.1}"#);
        let back: Composition = serde_json::from_str(&s).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn composition_rejects_unknown_symbol() {
        let err = serde_json::from_str::<Composition>(r#"{"Xx":1.0}"#).unwrap_err();
        assert!(err.to_string().contains("unknown element symbol"));
    }

    #[test]
    fn composition_parse_is_case_insensitive() {
        let c = Composition::parse("c=0.4, CR=1.1").unwrap();
        assert_eq!(c.get(Element::C), 0.4);
        assert_eq!(c.get(Element::Cr), 1.1);
        assert!(Composition::parse("Fe2=1").is_err());
        assert!(Composition::parse("C:0.4").is_err());
    }

    #[test]
    fn feature_vector_matches_names() {
        let (p, _) = validate_record(&raw_ok(), &ImputeContext::default()).unwrap();
        let f = p.features();
        assert_eq!(f.len(), FEATURE_NAMES.len());
        assert_eq!(f[0], 0.4);
        assert_eq!(f[17], 900.0);
        assert_eq!(f[19], 1.0);
    }
}
