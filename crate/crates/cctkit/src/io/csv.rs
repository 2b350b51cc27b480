//! CSV export of synthesized diagrams, one row per cooling rate.

use std::fmt::Write;

use super::IoError;
use crate::data::Phase;
use crate::stack::CCTDiagram;

/// Serializes the per-rate predictions as CSV. Absent values are empty
/// cells; floats use Rust's shortest-roundtrip formatting so the output
/// is deterministic and parses back exactly.
pub fn diagram_to_csv(diagram: &CCTDiagram) -> Result<String, IoError> {
    if diagram.predictions.is_empty() {
        return Err(IoError::EmptyDiagram);
    }
    let mut out = String::new();
    out.push_str("log_rate,rate_k_per_s,ac1,ac3");
    for p in Phase::ALL {
        let k = p.key();
        let _ = write!(out, ",{k}_present,{k}_start,{k}_finish,{k}_fraction");
    }
    out.push_str(",override_applied,clamp_applied\n");

    let cell = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for p in &diagram.predictions {
        let _ = write!(out, "{},{},{},{}", p.log_rate, 10f64.powf(p.log_rate), p.ac1, p.ac3);
        for k in 0..4 {
            let _ = write!(
                out,
                ",{},{},{},{}",
                p.present[k] as u8,
                cell(p.start[k]),
                cell(p.finish[k]),
                p.fractions[k]
            );
        }
        let _ = writeln!(out, ",{},{}", p.override_applied as u8, p.clamp_applied as u8);
    }
    Ok(out)
}
