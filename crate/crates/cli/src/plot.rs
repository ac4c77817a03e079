//! Static SVG convergence plots from result CSVs.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::CliError;
use crate::output::COLUMNS;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 230.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 50.0;
const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"];

#[derive(Clone, Debug, PartialEq)]
struct Series {
    label: String,
    measured: Vec<(f64, f64)>,
    bound: Vec<(f64, f64)>,
}

fn parse_cell(s: &str) -> Option<f64> {
    match s {
        "na" | "+inf" => None,
        _ => s.parse().ok(),
    }
}

fn read_series(src: &[u8]) -> Result<(String, Vec<Series>), CliError> {
    if src.iter().all(u8::is_ascii_whitespace) {
        return Ok((String::new(), vec![]));
    }
    let mut rdr = csv::Reader::from_reader(src);
    let header = rdr.headers().map_err(|e| CliError::Config(format!("csv: {e}")))?.clone();
    if header.iter().collect::<Vec<_>>() != COLUMNS {
        return Err(CliError::Config(format!("csv schema mismatch: expected `{}`", COLUMNS.join(","))));
    }
    let mut scenario = String::new();
    let mut series: Vec<Series> = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| CliError::Config(format!("csv: {e}")))?;
        let index: f64 = rec[3]
            .parse::<u32>()
            .map_err(|_| CliError::Config(format!("csv row {}: bad index `{}`", line + 2, &rec[3])))?
            .into();
        for (col, cell) in [(6, &rec[6]), (7, &rec[7])] {
            if parse_cell(cell).is_none() && !matches!(cell, "na" | "+inf") {
                return Err(CliError::Config(format!("csv row {}: bad {} `{cell}`", line + 2, COLUMNS[col])));
            }
        }
        if scenario.is_empty() {
            scenario = rec[0].to_string();
        }
        let label = format!("{} {}", &rec[5], &rec[4]);
        let pos = match series.iter().position(|s| s.label == label) {
            Some(p) => p,
            None => {
                series.push(Series { label, measured: vec![], bound: vec![] });
                series.len() - 1
            }
        };
        let s = &mut series[pos];
        if let Some(v) = parse_cell(&rec[6]).filter(|v| *v > 0.0) {
            s.measured.push((index, v));
        }
        if let Some(b) = parse_cell(&rec[7]).filter(|b| *b > 0.0) {
            s.bound.push((index, b));
        }
    }
    series.retain(|s| !s.measured.is_empty() || !s.bound.is_empty());
    Ok((scenario, series))
}

struct Frame {
    x0: f64,
    x1: f64,
    e0: i32,
    e1: i32,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        let t = (y.log10() - self.e0 as f64) / (self.e1 - self.e0) as f64;
        HEIGHT - BOTTOM - t * (HEIGHT - TOP - BOTTOM)
    }
}

fn frame(series: &[Series]) -> Frame {
    let pts = series.iter().flat_map(|s| s.measured.iter().chain(&s.bound));
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        return Frame { x0: 0.0, x1: 1.0, e0: -3, e1: 0 };
    }
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    let e0 = y0.log10().floor() as i32;
    let e1 = (y1.log10().ceil() as i32).max(e0 + 1);
    Frame { x0, x1, e0, e1 }
}

fn polyline(out: &mut String, f: &Frame, pts: &[(f64, f64)], color: &str, dashed: bool) {
    let coords: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", f.px(x), f.py(y))).collect();
    let dash = if dashed { " stroke-dasharray=\"6 4\"" } else { "" };
    let _ = writeln!(out, "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"{dash} points=\"{}\"/>", coords.join(" "));
    if !dashed {
        for &(x, y) in pts {
            let _ = writeln!(out, "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"2.5\" fill=\"{color}\"/>", f.px(x), f.py(y));
        }
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Log-scale plot of `measured` (solid) and `bound` (dashed) against the
/// index column, one curve per (metric, space).
pub fn convergence_svg(csv_src: &[u8]) -> Result<String, CliError> {
    let (scenario, series) = read_series(csv_src)?;
    let f = frame(&series);
    let mut out = String::new();
    let _ = writeln!(out, "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\" font-size=\"11\">");
    let _ = writeln!(out, "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>");
    let (xa, xb, ya, yb) = (LEFT, WIDTH - RIGHT, TOP, HEIGHT - BOTTOM);
    let _ = writeln!(out, "<rect x=\"{xa}\" y=\"{ya}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>", xb - xa, yb - ya);
    for e in f.e0..=f.e1 {
        let y = f.py(10f64.powi(e));
        let _ = writeln!(out, "<line x1=\"{xa}\" y1=\"{y:.2}\" x2=\"{xb}\" y2=\"{y:.2}\" stroke=\"#dddddd\"/>");
        let _ = writeln!(out, "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">1e{e}</text>", xa - 6.0, y + 4.0);
    }
    let span = f.x1 - f.x0;
    let step = (span / 10.0).ceil().max(1.0);
    let mut x = f.x0;
    while x <= f.x1 + 1e-9 {
        let px = f.px(x);
        let _ = writeln!(out, "<line x1=\"{px:.2}\" y1=\"{yb}\" x2=\"{px:.2}\" y2=\"{:.2}\" stroke=\"black\"/>", yb + 4.0);
        let _ = writeln!(out, "<text x=\"{px:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{x}</text>", yb + 16.0);
        x += step;
    }
    let _ = writeln!(out, "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">index (m or k)</text>", (xa + xb) / 2.0, HEIGHT - 12.0);
    let _ = writeln!(out, "<text x=\"{xa}\" y=\"18\">{}</text>", escape(&scenario));

    let mut drawn: Vec<&[(f64, f64)]> = Vec::new();
    let mut legend = Vec::new();
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        if !s.bound.is_empty() && !drawn.contains(&s.bound.as_slice()) {
            polyline(&mut out, &f, &s.bound, color, true);
            drawn.push(&s.bound);
            legend.push((format!("bound: {}", s.label), color, true));
        }
        if !s.measured.is_empty() {
            polyline(&mut out, &f, &s.measured, color, false);
        }
        legend.push((s.label.clone(), color, false));
    }
    for (i, (label, color, dashed)) in legend.iter().enumerate() {
        let y = TOP + 10.0 + 16.0 * i as f64;
        let lx = WIDTH - RIGHT + 12.0;
        let dash = if *dashed { " stroke-dasharray=\"6 4\"" } else { "" };
        let _ = writeln!(out, "<line x1=\"{lx}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" stroke=\"{color}\" stroke-width=\"1.5\"{dash}/>", lx + 20.0);
        let _ = writeln!(out, "<text x=\"{:.2}\" y=\"{:.2}\">{}</text>", lx + 26.0, y + 4.0, escape(label));
    }
    out.push_str("</svg>\n");
    Ok(out)
}

pub fn plot_file(csv_path: &Path, out: &Path) -> Result<(), CliError> {
    let src = std::fs::read(csv_path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", csv_path.display())))?;
    let svg = convergence_svg(&src)?;
    crate::output::write_atomic(out, svg.as_bytes())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEAD: &str = "scenario,d,n,index,space,metric,measured,bound,slack,wall_ms\n";

    #[test]
    fn empty_input_gives_axes() {
        for src in ["", HEAD] {
            let svg = convergence_svg(src.as_bytes()).unwrap();
            assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
            assert!(!svg.contains("<polyline"));
        }
    }

    #[test]
    fn schema_mismatch() {
        assert!(matches!(convergence_svg(b"a,b\n1,2\n"), Err(CliError::Config(_))));
        let bad = format!("{HEAD}mult1d,4,1,x,linf,comm,1,1,0,0\n");
        assert!(convergence_svg(bad.as_bytes()).is_err());
    }

    #[test]
    fn shared_bound_drawn_once() {
        let mut src = HEAD.to_string();
        for space in ["ln1(2)", "ln1(3)"] {
            for k in 1..=3 {
                let b = 2f64.powi(3 - k);
                src += &format!("appendixA,16,1,{k},{space},residual,{},{b},0,0\n", b / 10.0);
            }
        }
        let svg = convergence_svg(src.as_bytes()).unwrap();
        assert_eq!(svg.matches("stroke-dasharray=\"6 4\" points").count(), 1);
        assert_eq!(svg.matches("<polyline").count(), 3);
        assert_eq!(svg, convergence_svg(src.as_bytes()).unwrap());
    }

    #[test]
    fn markers_are_skipped() {
        let src = format!("{HEAD}sweep_psi,1,1,1,pow(1),m_k,+inf,na,na,0\nsweep_psi,1,1,1,pow(1/2),m_k,2,na,na,0\n");
        let svg = convergence_svg(src.as_bytes()).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 1);
    }
}
