//! CSV, JSON and SVG emission plus the run manifest.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Serialize;
use serde_json::Value;

use crate::config::{Format, RunConfig};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Bool(bool),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Float(x) => format!("{x:.16e}"),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::render).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }
}

/// A line chart: named series over a shared x axis.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Chart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub x: Vec<f64>,
    pub series: Vec<(String, Vec<f64>)>,
}

/// What a subcommand produced.
#[derive(Debug, Clone, Default)]
pub struct Artifact {
    pub table: Table,
    pub json: Value,
    pub chart: Option<Chart>,
    /// True when an asserted bound failed; the report is still written.
    pub violation: bool,
    pub summary: Vec<String>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    schema_version: u32,
    tool: &'static str,
    version: &'static str,
    subcommand: &'a str,
    config: &'a RunConfig,
    outputs: Vec<String>,
    passed: bool,
}

pub fn manifest_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("output");
    out.with_file_name(format!("{stem}.manifest.json"))
}

fn to_json_string<T: Serialize>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

/// Writes the artifact in the configured format and its manifest; returns the
/// paths written.
pub fn write_artifact(config: &RunConfig, artifact: &Artifact) -> Result<Vec<PathBuf>> {
    let body = match config.format {
        Format::Csv => artifact.table.to_csv(),
        Format::Json => to_json_string(&artifact.json)?,
        Format::Svg => match &artifact.chart {
            Some(chart) => render_svg(chart),
            None => bail!(
                "{} has no chart; use --format csv or json",
                config.subcommand
            ),
        },
    };
    let out = &config.out;
    if let Some(dir) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(out, body).with_context(|| format!("writing {}", out.display()))?;

    let file_name = out
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let manifest = Manifest {
        schema_version: SCHEMA_VERSION,
        tool: "qwalk",
        version: env!("CARGO_PKG_VERSION"),
        subcommand: &config.subcommand,
        config,
        outputs: vec![file_name],
        passed: !artifact.violation,
    };
    let mpath = manifest_path(out);
    fs::write(&mpath, to_json_string(&manifest)?)
        .with_context(|| format!("writing {}", mpath.display()))?;
    Ok(vec![out.clone(), mpath])
}

const PALETTE: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#7f7f7f"];

/// Minimal static SVG line chart: frame, min/max tick labels, one polyline
/// per series and a legend.
pub fn render_svg(chart: &Chart) -> String {
    let (w, h) = (800.0, 500.0);
    let (left, right, top, bottom) = (80.0, 20.0, 40.0, 60.0);
    let finite = |v: &f64| v.is_finite();
    let xmin = chart
        .x
        .iter()
        .copied()
        .filter(finite)
        .fold(f64::INFINITY, f64::min);
    let xmax = chart
        .x
        .iter()
        .copied()
        .filter(finite)
        .fold(f64::NEG_INFINITY, f64::max);
    let ys = chart
        .series
        .iter()
        .flat_map(|(_, v)| v.iter().copied())
        .filter(finite);
    let (ymin, ymax) = ys.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), y| {
        (a.min(y), b.max(y))
    });
    let span = |lo: f64, hi: f64| if hi > lo { hi - lo } else { 1.0 };
    let (xs, yspan) = (span(xmin, xmax), span(ymin, ymax));
    let px = |x: f64| left + (x - xmin) / xs * (w - left - right);
    let py = |y: f64| h - bottom - (y - ymin) / yspan * (h - top - bottom);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
        w / 2.0,
        escape(&chart.title)
    );
    let _ = writeln!(
        s,
        r#"<rect x="{left}" y="{top}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        w - left - right,
        h - top - bottom
    );
    let _ = writeln!(
        s,
        r#"<text x="{left}" y="{}" text-anchor="middle">{}</text>"#,
        h - bottom + 16.0,
        fmt_tick(xmin)
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        w - right,
        h - bottom + 16.0,
        fmt_tick(xmax)
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#,
        left - 6.0,
        h - bottom,
        fmt_tick(ymin)
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#,
        left - 6.0,
        top + 10.0,
        fmt_tick(ymax)
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        w / 2.0,
        h - 20.0,
        escape(&chart.x_label)
    );
    let _ = writeln!(
        s,
        r#"<text x="20" y="{}" text-anchor="middle" transform="rotate(-90 20 {})">{}</text>"#,
        h / 2.0,
        h / 2.0,
        escape(&chart.y_label)
    );
    for (i, (name, ys)) in chart.series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let points: Vec<String> = chart
            .x
            .iter()
            .zip(ys)
            .filter(|(x, y)| x.is_finite() && y.is_finite())
            .map(|(&x, &y)| format!("{:.2},{:.2}", px(x), py(y)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            points.join(" ")
        );
        let ly = top + 16.0 + 16.0 * i as f64;
        let lx = w - right - 180.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx}" y1="{}" x2="{}" y2="{}" stroke="{color}" stroke-width="2"/>"#,
            ly - 4.0,
            lx + 20.0,
            ly - 4.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{ly}">{}</text>"#,
            lx + 26.0,
            escape(name)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn fmt_tick(v: f64) -> String {
    if !v.is_finite() {
        return String::new();
    }
    if v != 0.0 && (v.abs() >= 1e4 || v.abs() < 1e-2) {
        format!("{v:.3e}")
    } else {
        format!("{v:.3}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_rendering() {
        let mut t = Table::new(&["T", "x", "ok"]);
        t.push(vec![3usize.into(), 0.1.into(), true.into()]);
        assert_eq!(t.to_csv(), "T,x,ok\n3,1.0000000000000001e-1,true\n");
    }

    #[test]
    fn manifest_next_to_output() {
        assert_eq!(
            manifest_path(Path::new("results/fig1.csv")),
            PathBuf::from("results/fig1.manifest.json")
        );
    }

    #[test]
    fn svg_contains_series() {
        let chart = Chart {
            title: "a<b".into(),
            x_label: "T".into(),
            y_label: "p".into(),
            x: vec![0.0, 1.0, 2.0],
            series: vec![
                ("one".into(), vec![1.0, 0.5, 0.25]),
                ("two".into(), vec![0.1, 0.1, 0.1]),
            ],
        };
        let svg = render_svg(&chart);
        assert!(svg.starts_with("<svg"));
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains("a&lt;b"));
    }
}
