//! Line-oriented JSON dataset format.
//!
//! The first line is a header object carrying the schema version and the
//! base-feature statistics; every following line is one [`DataPoint`].
//! The stats in the header are informational: readers recompute them from
//! the measured points so the invariant cannot drift.

use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{DataPoint, Dataset, FeatureStats, RawRecord, ValidationError};

pub const DATASET_SCHEMA: u32 = 1;
const DATASET_KIND: &str = "cct-dataset";

#[derive(Debug, Error)]
pub enum JsonlError {
    #[error("i/o failure: {0}")]
    Io(#[from] io::Error),
    #[error("malformed line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Validation(#[from] ValidationError),
}

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    schema: u32,
    kind: String,
    points: usize,
    feature_stats: FeatureStats,
}

pub fn write_dataset<W: Write>(dataset: &Dataset, mut w: W) -> io::Result<()> {
    let header = Header {
        schema: DATASET_SCHEMA,
        kind: DATASET_KIND.to_string(),
        points: dataset.len(),
        feature_stats: dataset.feature_stats().clone(),
    };
    writeln!(w, "{}", serde_json::to_string(&header)?)?;
    for p in dataset.points() {
        writeln!(w, "{}", serde_json::to_string(p)?)?;
    }
    Ok(())
}

pub fn read_dataset<R: BufRead>(r: R) -> Result<Dataset, JsonlError> {
    let mut lines = r.lines().enumerate();
    let header: Header = loop {
        let (i, line) = lines
            .next()
            .ok_or_else(|| JsonlError::Parse { line: 1, message: "empty input".into() })?;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        break serde_json::from_str(&line)
            .map_err(|e| JsonlError::Parse { line: i + 1, message: e.to_string() })?;
    };
    if header.kind != DATASET_KIND {
        return Err(JsonlError::Parse {
            line: 1,
            message: format!("expected kind `{DATASET_KIND}`, got `{}`", header.kind),
        });
    }
    if header.schema != DATASET_SCHEMA {
        return Err(ValidationError::SchemaVersion {
            found: header.schema,
            expected: DATASET_SCHEMA,
        }
        .into());
    }

    let mut points = Vec::with_capacity(header.points);
    for (i, line) in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let p: DataPoint = serde_json::from_str(&line)
            .map_err(|e| JsonlError::Parse { line: i + 1, message: e.to_string() })?;
        points.push(p);
    }
    Ok(Dataset::new(points)?)
}

/// Reads raw (pre-validation) records, one JSON object per line, no header.
pub fn read_raw_records<R: BufRead>(r: R) -> Result<Vec<RawRecord>, JsonlError> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: RawRecord = serde_json::from_str(&line)
            .map_err(|e| JsonlError::Parse { line: i + 1, message: e.to_string() })?;
        out.push(rec);
    }
    Ok(out)
}
