//! Deterministic SVG rendering of CCT diagrams.
//!
//! Time runs on a log10 x-axis, temperature on a linear y-axis. Each
//! cooling rate contributes a gray cooling path; phase boundaries are
//! colored polylines, dashed for finish loci. The output depends only on
//! the diagram contents, so identical diagrams render byte-identical.

use std::fmt::Write;

use super::IoError;
use crate::data::Phase;
use crate::stack::{CCTDiagram, LocusKind};

const WIDTH: f64 = 880.0;
const HEIGHT: f64 = 620.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = WIDTH - 30.0;
const TOP: f64 = 52.0;
const BOTTOM: f64 = HEIGHT - 62.0;
const CURVE_SAMPLES: usize = 80;

fn phase_color(phase: Phase) -> &'static str {
    match phase {
        Phase::Ferrite => "#1f77b4",
        Phase::Pearlite => "#2ca02c",
        Phase::Bainite => "#ff7f0e",
        Phase::Martensite => "#d62728",
    }
}

struct Frame {
    xlo: f64,
    xhi: f64,
    ylo: f64,
    yhi: f64,
}

impl Frame {
    fn x(&self, log_time: f64) -> f64 {
        LEFT + (log_time - self.xlo) / (self.xhi - self.xlo) * (RIGHT - LEFT)
    }

    fn y(&self, temp: f64) -> f64 {
        BOTTOM - (temp - self.ylo) / (self.yhi - self.ylo) * (BOTTOM - TOP)
    }
}

/// Picks plot bounds covering every locus point, padding the time axis
/// out to whole decades. Diagrams whose rates produced no boundaries at
/// all fall back to the span of the cooling paths themselves.
fn frame_for(diagram: &CCTDiagram) -> Frame {
    let hold = diagram.aust.temperature;
    let mut t_min = f64::INFINITY;
    let mut t_max = f64::NEG_INFINITY;
    let mut temp_min = f64::INFINITY;
    for locus in &diagram.loci {
        for p in locus.segments.iter().flatten() {
            if p.time > 0.0 && p.time.is_finite() {
                t_min = t_min.min(p.time);
                t_max = t_max.max(p.time);
            }
            if p.temperature.is_finite() {
                temp_min = temp_min.min(p.temperature);
            }
        }
    }
    if !(t_min.is_finite() && t_max.is_finite()) {
        // No boundaries: frame the cooling paths over a 100..hold-50 drop.
        for p in &diagram.predictions {
            let rate = 10f64.powf(p.log_rate);
            t_min = t_min.min(100.0 / rate);
            t_max = t_max.max((hold - 50.0).max(100.0) / rate);
        }
    }
    if !(t_min.is_finite() && t_max.is_finite()) {
        t_min = 0.1;
        t_max = 1000.0;
    }
    if !temp_min.is_finite() {
        temp_min = 50.0;
    }
    let mut xlo = t_min.log10().floor();
    let mut xhi = t_max.log10().ceil();
    if xhi - xlo < 1.0 {
        xlo -= 0.5;
        xhi = xlo + 1.5;
    }
    let ylo = (temp_min - 40.0).max(0.0).div_euclid(50.0) * 50.0;
    let yhi = hold + 30.0;
    Frame { xlo, xhi, ylo, yhi }
}

fn composition_label(diagram: &CCTDiagram) -> String {
    let parts: Vec<String> = diagram
        .composition
        .iter()
        .filter(|(_, v)| *v > 0.0)
        .map(|(e, v)| format!("{} {}", e.symbol(), v))
        .collect();
    if parts.is_empty() { "unalloyed".into() } else { parts.join("  ") }
}

/// Renders `diagram` to a standalone SVG document.
pub fn render_svg(diagram: &CCTDiagram) -> Result<String, IoError> {
    if diagram.predictions.is_empty() {
        return Err(IoError::EmptyDiagram);
    }
    let frame = frame_for(diagram);
    let mut svg = String::with_capacity(16 * 1024);
    let w = &mut svg;

    let _ = writeln!(
        w,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif">"#
    );
    let _ = writeln!(w, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);

    // Decade gridlines and x tick labels.
    let mut k = frame.xlo.ceil() as i64;
    while (k as f64) <= frame.xhi {
        let x = frame.x(k as f64);
        let _ = writeln!(
            w,
            r##"<line x1="{x:.1}" y1="{TOP}" x2="{x:.1}" y2="{BOTTOM}" stroke="#ddd" stroke-width="1"/>"##
        );
        let _ = writeln!(
            w,
            r#"<text x="{x:.1}" y="{:.1}" text-anchor="middle" font-size="12">10^{k}</text>"#,
            BOTTOM + 18.0
        );
        k += 1;
    }
    // Horizontal gridlines every 100 degC.
    let mut t = (frame.ylo / 100.0).ceil() * 100.0;
    while t <= frame.yhi {
        let y = frame.y(t);
        let _ = writeln!(
            w,
            r##"<line x1="{LEFT}" y1="{y:.1}" x2="{RIGHT}" y2="{y:.1}" stroke="#ddd" stroke-width="1"/>"##
        );
        let _ = writeln!(
            w,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end" font-size="12">{t:.0}</text>"#,
            LEFT - 8.0,
            y + 4.0
        );
        t += 100.0;
    }

    // Cooling paths: T(t) = hold - rate * t, straight in linear time but
    // curved against the log axis.
    let hold = diagram.aust.temperature;
    for p in &diagram.predictions {
        let rate = 10f64.powf(p.log_rate);
        let mut pts = String::new();
        for i in 0..=CURVE_SAMPLES {
            let lx = frame.xlo + (frame.xhi - frame.xlo) * i as f64 / CURVE_SAMPLES as f64;
            let temp = hold - rate * 10f64.powf(lx);
            if temp < frame.ylo || temp > frame.yhi {
                continue;
            }
            let _ = write!(pts, "{:.1},{:.1} ", frame.x(lx), frame.y(temp));
        }
        if !pts.is_empty() {
            let _ = writeln!(
                w,
                r##"<polyline points="{}" fill="none" stroke="#bbb" stroke-width="0.8"/>"##,
                pts.trim_end()
            );
        }
    }

    // Phase boundaries.
    for locus in &diagram.loci {
        let color = phase_color(locus.phase);
        let dash = match locus.kind {
            LocusKind::Start => "",
            LocusKind::Finish => r#" stroke-dasharray="6,4""#,
        };
        for segment in &locus.segments {
            let drawable: Vec<_> = segment.iter().filter(|p| p.time > 0.0).collect();
            match drawable.len() {
                0 => {}
                1 => {
                    let p = drawable[0];
                    let _ = writeln!(
                        w,
                        r#"<circle cx="{:.1}" cy="{:.1}" r="3" fill="{color}"/>"#,
                        frame.x(p.time.log10()),
                        frame.y(p.temperature)
                    );
                }
                _ => {
                    let mut pts = String::new();
                    for p in &drawable {
                        let _ = write!(
                            pts,
                            "{:.1},{:.1} ",
                            frame.x(p.time.log10()),
                            frame.y(p.temperature)
                        );
                    }
                    let _ = writeln!(
                        w,
                        r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"{dash}/>"#,
                        pts.trim_end()
                    );
                }
            }
        }
    }

    // Axes on top of the data.
    let _ = writeln!(
        w,
        r##"<rect x="{LEFT}" y="{TOP}" width="{:.1}" height="{:.1}" fill="none" stroke="#333" stroke-width="1.5"/>"##,
        RIGHT - LEFT,
        BOTTOM - TOP
    );
    let _ = writeln!(
        w,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="14">time (s)</text>"#,
        (LEFT + RIGHT) / 2.0,
        HEIGHT - 18.0
    );
    let _ = writeln!(
        w,
        r#"<text x="20" y="{:.1}" text-anchor="middle" font-size="14" transform="rotate(-90 20 {:.1})">temperature (degC)</text>"#,
        (TOP + BOTTOM) / 2.0,
        (TOP + BOTTOM) / 2.0
    );
    let _ = writeln!(
        w,
        r#"<text x="{LEFT}" y="22" font-size="15" font-weight="bold">CCT  {}</text>"#,
        composition_label(diagram)
    );
    let _ = writeln!(
        w,
        r##"<text x="{LEFT}" y="40" font-size="12" fill="#555">austenitized {} degC / {} s, {} cooling rates</text>"##,
        diagram.aust.temperature,
        diagram.aust.time,
        diagram.predictions.len()
    );

    // Legend for whatever is actually drawn.
    let mut ly = TOP + 16.0;
    let lx = RIGHT - 150.0;
    let legend = |line: &mut String, color: &str, dash: &str, label: &str, y: f64| {
        let _ = writeln!(
            line,
            r#"<line x1="{lx:.1}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="{color}" stroke-width="2"{dash}/>"#,
            lx + 26.0
        );
        let _ = writeln!(
            line,
            r#"<text x="{:.1}" y="{:.1}" font-size="12">{label}</text>"#,
            lx + 32.0,
            y + 4.0
        );
    };
    for locus in &diagram.loci {
        let label = format!(
            "{} {}",
            locus.phase.name(),
            match locus.kind {
                LocusKind::Start => "start",
                LocusKind::Finish => "finish",
            }
        );
        let dash = match locus.kind {
            LocusKind::Start => "",
            LocusKind::Finish => r#" stroke-dasharray="6,4""#,
        };
        legend(w, phase_color(locus.phase), dash, &label, ly);
        ly += 16.0;
    }
    legend(w, "#bbb", "", "cooling path", ly);

    let _ = writeln!(w, "</svg>");
    Ok(svg)
}
