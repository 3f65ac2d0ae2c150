//! Plain-text artifacts: CSV convergence tables, SVG log-log plots, and the
//! mesh, layer and solution dumps.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::analysis::{pre_saturation_len, ConvergenceTable, ErrorReport, Norm, Parameter};
use crate::layer::ElementClass;
use crate::mesh::Mesh;

pub const CSV_HEADER: [&str; 12] = [
    "param",
    "eps",
    "h",
    "delta",
    "kappa",
    "l2",
    "h1_semi",
    "h1_full",
    "linf_omega",
    "linf_outside",
    "free_dofs",
    "vertices",
];

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("line {line}: {msg}")]
    Parse { line: u64, msg: String },
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> ReportError + '_ {
    move |source| ReportError::Io { path: path.to_path_buf(), source }
}

/// Sixteen significant digits in scientific notation.
pub fn format_real(x: f64) -> String {
    format!("{x:.15e}")
}

pub fn write_csv<W: Write>(table: &ConvergenceTable, out: W) -> Result<(), ReportError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for row in &table.rows {
        let r = &row.report;
        let reals = [row.param, r.eps, r.h, r.delta, r.kappa, r.l2, r.h1_semi, r.h1_full, r.linf_omega, r.linf_outside];
        let mut record: Vec<String> = reals.iter().map(|&x| format_real(x)).collect();
        record.push(r.free_dofs.to_string());
        record.push(r.vertices.to_string());
        w.write_record(&record)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn write_csv_file(table: &ConvergenceTable, path: &Path) -> Result<(), ReportError> {
    let file = File::create(path).map_err(io_err(path))?;
    write_csv(table, BufWriter::new(file))
}

pub fn read_csv<R: Read>(input: R, parameter: Parameter) -> Result<ConvergenceTable, ReportError> {
    let mut rd = csv::Reader::from_reader(input);
    if rd.headers()?.iter().ne(CSV_HEADER) {
        return Err(ReportError::Parse { line: 1, msg: "unexpected header".into() });
    }
    let mut table = ConvergenceTable::new(parameter);
    for record in rd.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let bad = |msg: String| ReportError::Parse { line, msg };
        if record.len() != CSV_HEADER.len() {
            return Err(bad(format!("expected {} fields, got {}", CSV_HEADER.len(), record.len())));
        }
        let real = |i: usize| record[i].parse::<f64>().map_err(|e| bad(format!("{}: {e}", CSV_HEADER[i])));
        let int = |i: usize| record[i].parse::<usize>().map_err(|e| bad(format!("{}: {e}", CSV_HEADER[i])));
        let report = ErrorReport {
            eps: real(1)?,
            h: real(2)?,
            delta: real(3)?,
            kappa: real(4)?,
            l2: real(5)?,
            h1_semi: real(6)?,
            h1_full: real(7)?,
            linf_omega: real(8)?,
            linf_outside: real(9)?,
            free_dofs: int(10)?,
            vertices: int(11)?,
        };
        table.push(real(0)?, report).map_err(|e| bad(e.to_string()))?;
    }
    Ok(table)
}

/// One plot panel: a norm and the slope of its guide line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Panel {
    pub norm: Norm,
    pub slope: f64,
}

/// Guide line `y = y0 (x / x0)^slope` through `anchor = (x0, y0)`.
pub fn reference_value(anchor: (f64, f64), slope: f64, x: f64) -> f64 {
    anchor.1 * (x / anchor.0).powf(slope)
}

const PANEL_W: f64 = 300.0;
const PANEL_H: f64 = 250.0;
const LEFT: f64 = 56.0;
const RIGHT: f64 = 14.0;
const TOP: f64 = 28.0;
const BOTTOM: f64 = 40.0;

struct Axis {
    lo: f64,
    hi: f64,
    pix_lo: f64,
    pix_hi: f64,
}

impl Axis {
    fn new(values: impl Iterator<Item = f64>, pix_lo: f64, pix_hi: f64) -> Axis {
        let (mut lo, mut hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
            let l = v.log2();
            (a.min(l), b.max(l))
        });
        if !(hi - lo > 1e-9) {
            lo -= 1.0;
            hi += 1.0;
        }
        let pad = 0.05 * (hi - lo);
        Axis { lo: lo - pad, hi: hi + pad, pix_lo, pix_hi }
    }

    fn map(&self, v: f64) -> f64 {
        self.pix_lo + (v.log2() - self.lo) / (self.hi - self.lo) * (self.pix_hi - self.pix_lo)
    }

    fn ticks(&self) -> Vec<i32> {
        let first = self.lo.ceil() as i32;
        let last = self.hi.floor() as i32;
        let count = (last - first + 1).max(1);
        let step = ((count + 5) / 6).max(1);
        (first..=last).filter(|k| (k - first) % step == 0).collect()
    }
}

fn power_label(k: i32) -> String {
    format!("2<tspan dy=\"-6\" font-size=\"8\">{k}</tspan>")
}

fn render_panel(svg: &mut String, table: &ConvergenceTable, panel: Panel, ox: f64) {
    let errors = table.errors(panel.norm);
    let params: Vec<f64> = table.rows.iter().map(|r| r.param).collect();
    let window = pre_saturation_len(table, panel.norm).max(2).min(params.len());
    let anchor = (params[0], 1.5 * errors[0]);
    let guide: Vec<(f64, f64)> = if params.len() >= 2 {
        [params[0], params[window - 1]]
            .iter()
            .map(|&x| (x, reference_value(anchor, panel.slope, x)))
            .collect()
    } else {
        Vec::new()
    };

    let x = Axis::new(params.iter().copied(), ox + LEFT, ox + PANEL_W - RIGHT);
    let y = Axis::new(
        errors.iter().copied().chain(guide.iter().map(|g| g.1)),
        PANEL_H - BOTTOM,
        TOP,
    );

    let _ = writeln!(
        svg,
        r#"<g class="panel"><rect x="{:.2}" y="{TOP:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="black"/>"#,
        ox + LEFT,
        PANEL_W - LEFT - RIGHT,
        PANEL_H - TOP - BOTTOM
    );
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="18" text-anchor="middle">{} (slope {})</text>"#,
        ox + 0.5 * (LEFT + PANEL_W - RIGHT),
        panel.norm.label(),
        panel.slope
    );
    for k in x.ticks() {
        let px = x.map(2f64.powi(k));
        let base = PANEL_H - BOTTOM;
        let _ = writeln!(
            svg,
            r#"<line x1="{px:.2}" y1="{base:.2}" x2="{px:.2}" y2="{:.2}" stroke="black"/><text x="{px:.2}" y="{:.2}" text-anchor="middle" font-size="10">{}</text>"#,
            base - 4.0,
            base + 16.0,
            power_label(k)
        );
    }
    for k in y.ticks() {
        let py = y.map(2f64.powi(k));
        let left = ox + LEFT;
        let _ = writeln!(
            svg,
            r#"<line x1="{left:.2}" y1="{py:.2}" x2="{:.2}" y2="{py:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end" font-size="10">{}</text>"#,
            left + 4.0,
            left - 4.0,
            py + 3.0,
            power_label(k)
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        ox + 0.5 * (LEFT + PANEL_W - RIGHT),
        PANEL_H - 6.0,
        table.parameter.name()
    );
    if let [a, b] = guide[..] {
        let _ = writeln!(
            svg,
            r#"<line class="reference" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="black" stroke-width="1.2"/>"#,
            x.map(a.0),
            y.map(a.1),
            x.map(b.0),
            y.map(b.1)
        );
    }
    for (&p, &e) in params.iter().zip(&errors) {
        let (cx, cy) = (x.map(p), y.map(e));
        let s = 4.0;
        let _ = writeln!(
            svg,
            r#"<path class="marker" d="M{:.2} {:.2}L{:.2} {:.2}M{:.2} {:.2}L{:.2} {:.2}" stroke="black" fill="none"/>"#,
            cx - s,
            cy - s,
            cx + s,
            cy + s,
            cx - s,
            cy + s,
            cx + s,
            cy - s
        );
    }
    svg.push_str("</g>\n");
}

/// Log-log plot with one panel per norm: crosses for the measured errors and
/// a solid guide line of the given slope over the rows before saturation.
///
/// Panics if the table is empty or holds non-positive values.
pub fn render_svg_loglog(table: &ConvergenceTable, panels: &[Panel]) -> String {
    assert!(!table.is_empty(), "cannot plot an empty table");
    for p in panels {
        for (row, e) in table.rows.iter().zip(table.errors(p.norm)) {
            assert!(row.param > 0.0 && e > 0.0, "log-log plot needs positive values");
        }
    }
    let width = PANEL_W * panels.len().max(1) as f64;
    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width:.0}\" height=\"{PANEL_H:.0}\" \
         viewBox=\"0 0 {width:.0} {PANEL_H:.0}\" font-family=\"sans-serif\" font-size=\"12\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    );
    for (i, &panel) in panels.iter().enumerate() {
        render_panel(&mut svg, table, panel, i as f64 * PANEL_W);
    }
    svg.push_str("</svg>\n");
    svg
}

pub fn write_svg_loglog(table: &ConvergenceTable, panels: &[Panel], path: &Path) -> Result<(), ReportError> {
    std::fs::write(path, render_svg_loglog(table, panels)).map_err(io_err(path))
}

/// One label per triangle, in mesh order.
pub fn write_layer_labels<W: Write>(labels: &[ElementClass], out: W) -> io::Result<()> {
    let mut out = BufWriter::new(out);
    for l in labels {
        writeln!(out, "{}", l.label())?;
    }
    out.flush()
}

/// `vertex_index x y value` per vertex.
pub fn write_solution<W: Write>(mesh: &Mesh, coefficients: &[f64], out: W) -> io::Result<()> {
    assert_eq!(coefficients.len(), mesh.vertex_count());
    let mut out = BufWriter::new(out);
    for (i, (p, u)) in mesh.vertices().iter().zip(coefficients).enumerate() {
        writeln!(out, "{i} {:e} {:e} {:e}", p[0], p[1], u)?;
    }
    out.flush()
}

/// Writes `contents` to `path` through a buffered writer.
pub fn write_file(path: &Path, contents: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> Result<(), ReportError> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    contents(&mut w).and_then(|_| w.flush()).map_err(io_err(path))
}
