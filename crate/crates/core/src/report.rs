//! Plain-text artifacts for run results: CSV series and standalone SVG
//! line charts.
//!
//! CSV numbers are written with the shortest representation that parses
//! back to the identical float, so a write/read cycle is lossless.

use crate::dynamics::scenarios::ErasureReport;
use crate::dynamics::RunRecord;
use crate::error::{Error, Result};
use std::fmt::Write as _;

pub const RUN_RECORD_HEADER: &str =
    "t,norm,spin_entropy,packet_separation,record_overlap,cm_purity";
pub const ERASURE_HEADER: &str = "p_plus,visibility_conditioned,cm_purity_conditioned";

pub fn run_record_to_csv(r: &RunRecord) -> String {
    let mut out = String::with_capacity(64 * (r.len() + 1));
    out.push_str(RUN_RECORD_HEADER);
    out.push('\n');
    for i in 0..r.len() {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.times[i],
            r.norm[i],
            r.spin_entropy[i],
            r.packet_separation[i],
            r.record_overlap[i],
            r.cm_purity[i]
        )
        .expect("string formatting cannot fail");
    }
    out
}

fn parse_field(field: &str, line_no: usize) -> Result<f64> {
    field
        .trim()
        .parse::<f64>()
        .map_err(|_| Error::InvalidInput {
            detail: format!("line {line_no}: '{field}' is not a number"),
        })
}

pub fn run_record_from_csv(text: &str) -> Result<RunRecord> {
    let mut lines = text.lines();
    let header = lines.next().unwrap_or("").trim_end();
    if header != RUN_RECORD_HEADER {
        return Err(Error::InvalidInput {
            detail: format!("unexpected CSV header '{header}'"),
        });
    }
    let mut r = RunRecord {
        times: Vec::new(),
        norm: Vec::new(),
        spin_entropy: Vec::new(),
        packet_separation: Vec::new(),
        record_overlap: Vec::new(),
        cm_purity: Vec::new(),
    };
    for (idx, line) in lines.enumerate() {
        let line = line.trim_end();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 6 {
            return Err(Error::InvalidInput {
                detail: format!("line {}: expected 6 fields, got {}", idx + 2, fields.len()),
            });
        }
        let line_no = idx + 2;
        r.times.push(parse_field(fields[0], line_no)?);
        r.norm.push(parse_field(fields[1], line_no)?);
        r.spin_entropy.push(parse_field(fields[2], line_no)?);
        r.packet_separation.push(parse_field(fields[3], line_no)?);
        r.record_overlap.push(parse_field(fields[4], line_no)?);
        r.cm_purity.push(parse_field(fields[5], line_no)?);
    }
    Ok(r)
}

pub fn erasure_to_csv(report: &ErasureReport) -> String {
    format!(
        "{}\n{},{},{}\n",
        ERASURE_HEADER, report.p_plus, report.visibility_conditioned, report.cm_purity_conditioned
    )
}

pub fn erasure_from_csv(text: &str) -> Result<ErasureReport> {
    let mut lines = text.lines();
    let header = lines.next().unwrap_or("").trim_end();
    if header != ERASURE_HEADER {
        return Err(Error::InvalidInput {
            detail: format!("unexpected CSV header '{header}'"),
        });
    }
    let row = lines
        .find(|l| !l.trim().is_empty())
        .ok_or(Error::InvalidInput {
            detail: "erasure CSV has no data row".into(),
        })?;
    let fields: Vec<&str> = row.split(',').collect();
    if fields.len() != 3 {
        return Err(Error::InvalidInput {
            detail: format!("expected 3 fields, got {}", fields.len()),
        });
    }
    Ok(ErasureReport {
        p_plus: parse_field(fields[0], 2)?,
        visibility_conditioned: parse_field(fields[1], 2)?,
        cm_purity_conditioned: parse_field(fields[2], 2)?,
    })
}

/// The five diagnostic series of a run, keyed by their CSV column names.
pub fn run_record_series(r: &RunRecord) -> [(&'static str, &[f64]); 5] {
    [
        ("norm", r.norm.as_slice()),
        ("spin_entropy", r.spin_entropy.as_slice()),
        ("packet_separation", r.packet_separation.as_slice()),
        ("record_overlap", r.record_overlap.as_slice()),
        ("cm_purity", r.cm_purity.as_slice()),
    ]
}

const CHART_W: f64 = 720.0;
const CHART_H: f64 = 440.0;
const MARGIN_L: f64 = 78.0;
const MARGIN_R: f64 = 24.0;
const MARGIN_T: f64 = 44.0;
const MARGIN_B: f64 = 56.0;

fn tick_label(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let a = v.abs();
    if !(1e-3..1e4).contains(&a) {
        format!("{v:.3e}")
    } else {
        let s = format!("{v:.4}");
        let s = s.trim_end_matches('0').trim_end_matches('.');
        s.to_string()
    }
}

fn escape_xml(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Standalone SVG line chart for one series.  No external references; the
/// output renders on its own.
pub fn svg_line_chart(
    title: &str,
    x_label: &str,
    y_label: &str,
    xs: &[f64],
    ys: &[f64],
) -> Result<String> {
    if xs.is_empty() || xs.len() != ys.len() {
        return Err(Error::InvalidInput {
            detail: format!(
                "chart needs matched nonempty series, got {} x {}",
                xs.len(),
                ys.len()
            ),
        });
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput {
            detail: "chart series must be finite".into(),
        });
    }
    let (mut x_lo, mut x_hi) = (xs[0], xs[0]);
    let (mut y_lo, mut y_hi) = (ys[0], ys[0]);
    for &x in xs {
        x_lo = x_lo.min(x);
        x_hi = x_hi.max(x);
    }
    for &y in ys {
        y_lo = y_lo.min(y);
        y_hi = y_hi.max(y);
    }
    // Flat series still need a visible band.
    if x_hi - x_lo < 1e-300 {
        let pad = x_lo.abs().max(1.0) * 0.05;
        x_lo -= pad;
        x_hi += pad;
    }
    if y_hi - y_lo < 1e-300 {
        let pad = y_lo.abs().max(1.0) * 0.05;
        y_lo -= pad;
        y_hi += pad;
    }
    let plot_w = CHART_W - MARGIN_L - MARGIN_R;
    let plot_h = CHART_H - MARGIN_T - MARGIN_B;
    let sx = |x: f64| MARGIN_L + (x - x_lo) / (x_hi - x_lo) * plot_w;
    let sy = |y: f64| MARGIN_T + (1.0 - (y - y_lo) / (y_hi - y_lo)) * plot_h;

    let mut svg = String::with_capacity(4096 + 16 * xs.len());
    writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {CHART_W} {CHART_H}\" font-family=\"sans-serif\" font-size=\"13\">"
    )
    .unwrap();
    writeln!(
        svg,
        "<rect width=\"{CHART_W}\" height=\"{CHART_H}\" fill=\"white\"/>"
    )
    .unwrap();
    writeln!(
        svg,
        "<text x=\"{:.1}\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">{}</text>",
        CHART_W / 2.0,
        escape_xml(title)
    )
    .unwrap();

    let n_ticks = 5;
    for i in 0..n_ticks {
        let f = i as f64 / (n_ticks - 1) as f64;
        let xv = x_lo + f * (x_hi - x_lo);
        let yv = y_lo + f * (y_hi - y_lo);
        let px = sx(xv);
        let py = sy(yv);
        writeln!(
            svg,
            "<line x1=\"{px:.1}\" y1=\"{MARGIN_T}\" x2=\"{px:.1}\" y2=\"{:.1}\" stroke=\"#dddddd\"/>",
            MARGIN_T + plot_h
        )
        .unwrap();
        writeln!(
            svg,
            "<line x1=\"{MARGIN_L}\" y1=\"{py:.1}\" x2=\"{:.1}\" y2=\"{py:.1}\" stroke=\"#dddddd\"/>",
            MARGIN_L + plot_w
        )
        .unwrap();
        writeln!(
            svg,
            "<text x=\"{px:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>",
            MARGIN_T + plot_h + 20.0,
            tick_label(xv)
        )
        .unwrap();
        writeln!(
            svg,
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{}</text>",
            MARGIN_L - 8.0,
            py + 4.0,
            tick_label(yv)
        )
        .unwrap();
    }
    writeln!(
        svg,
        "<rect x=\"{MARGIN_L}\" y=\"{MARGIN_T}\" width=\"{plot_w:.1}\" height=\"{plot_h:.1}\" fill=\"none\" stroke=\"#333333\"/>"
    )
    .unwrap();
    writeln!(
        svg,
        "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>",
        MARGIN_L + plot_w / 2.0,
        CHART_H - 12.0,
        escape_xml(x_label)
    )
    .unwrap();
    writeln!(
        svg,
        "<text x=\"18\" y=\"{:.1}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {:.1})\">{}</text>",
        MARGIN_T + plot_h / 2.0,
        MARGIN_T + plot_h / 2.0,
        escape_xml(y_label)
    )
    .unwrap();

    let mut points = String::with_capacity(16 * xs.len());
    for (x, y) in xs.iter().zip(ys) {
        write!(points, "{:.2},{:.2} ", sx(*x), sy(*y)).unwrap();
    }
    writeln!(
        svg,
        "<polyline points=\"{}\" fill=\"none\" stroke=\"#1f6fb4\" stroke-width=\"1.6\"/>",
        points.trim_end()
    )
    .unwrap();
    svg.push_str("</svg>\n");
    Ok(svg)
}
