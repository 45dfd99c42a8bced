//! Minimal line-plot writer. Output depends only on the table and the plot
//! spec, so re-rendering gives identical bytes.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::output::{write_text, Table};

const PALETTE: [&str; 12] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22",
    "#17becf", "#393b79", "#637939",
];

#[derive(Debug, Clone, PartialEq)]
pub struct PlotSpec {
    pub x: String,
    pub y: Vec<String>,
    /// Columns whose combined value splits the rows into separate curves.
    pub group_by: Vec<String>,
    pub title: String,
    pub x_label: Option<String>,
    pub y_label: Option<String>,
    pub log_y: bool,
    pub width: u32,
    pub height: u32,
}

impl PlotSpec {
    pub fn new(x: &str, y: &[&str]) -> Self {
        PlotSpec {
            x: x.to_string(),
            y: y.iter().map(|s| s.to_string()).collect(),
            group_by: Vec::new(),
            title: String::new(),
            x_label: None,
            y_label: None,
            log_y: false,
            width: 800,
            height: 500,
        }
    }

    pub fn grouped(mut self, columns: &[&str]) -> Self {
        self.group_by = columns.iter().map(|s| s.to_string()).collect();
        self
    }

    pub fn titled(mut self, title: &str) -> Self {
        self.title = title.to_string();
        self
    }

    pub fn log_y(mut self, on: bool) -> Self {
        self.log_y = on;
        self
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

struct Curve {
    label: String,
    points: Vec<(f64, f64)>,
}

fn collect_curves(table: &Table, spec: &PlotSpec) -> Result<Vec<Curve>> {
    if table.rows.is_empty() {
        return Err(Error::Data("no data rows to plot".into()));
    }
    if spec.y.is_empty() {
        return Err(Error::invalid("plot", "no y columns selected"));
    }
    let xs = table.numeric_column(&spec.x)?;
    let ys = spec
        .y
        .iter()
        .map(|c| table.numeric_column(c))
        .collect::<Result<Vec<_>>>()?;
    let group_idx = spec
        .group_by
        .iter()
        .map(|g| {
            table
                .column_index(g)
                .ok_or_else(|| Error::Data(format!("missing column `{g}`")))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut groups: Vec<(String, Vec<usize>)> = Vec::new();
    for (i, row) in table.rows.iter().enumerate() {
        let key = group_idx
            .iter()
            .zip(&spec.group_by)
            .map(|(&j, name)| format!("{name}={}", row[j]))
            .collect::<Vec<_>>()
            .join(", ");
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, rows)) => rows.push(i),
            None => groups.push((key, vec![i])),
        }
    }
    let mut curves = Vec::new();
    for (key, rows) in &groups {
        for (col, y) in spec.y.iter().zip(&ys) {
            let label = match (key.is_empty(), spec.y.len() > 1) {
                (true, _) => col.clone(),
                (false, true) => format!("{key}: {col}"),
                (false, false) => key.clone(),
            };
            let points = rows
                .iter()
                .map(|&i| (xs[i], y[i]))
                .filter(|&(_, v)| !spec.log_y || v > 0.0)
                .collect();
            curves.push(Curve { label, points });
        }
    }
    Ok(curves)
}

fn bounds<I: Iterator<Item = f64>>(values: I) -> (f64, f64) {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo <= f64::EPSILON * hi.abs().max(1.0) {
        let pad = 0.5 * lo.abs().max(1.0);
        return (lo - pad, hi + pad);
    }
    (lo, hi)
}

fn tick_label(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-2..1e4).contains(&a) {
        let s = format!("{v:.3}");
        let s = s.trim_end_matches('0').trim_end_matches('.');
        if s == "-0" {
            "0".into()
        } else {
            s.to_string()
        }
    } else {
        format!("{v:.2e}")
    }
}

/// Renders the selected columns of `table` as an SVG document.
pub fn render_table(table: &Table, spec: &PlotSpec) -> Result<String> {
    let curves = collect_curves(table, spec)?;
    let transform = |v: f64| if spec.log_y { v.log10() } else { v };
    let (x0, x1) = bounds(curves.iter().flat_map(|c| c.points.iter().map(|p| p.0)));
    let (y0, y1) = bounds(curves.iter().flat_map(|c| c.points.iter().map(|p| transform(p.1))));
    let (w, h) = (spec.width as f64, spec.height as f64);
    let (left, right, top, bottom) = (80.0, 220.0, 40.0, 60.0);
    let pw = w - left - right;
    let ph = h - top - bottom;
    let sx = |x: f64| left + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| top + ph - (transform(y) - y0) / (y1 - y0) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}">"#,
        spec.width, spec.height, spec.width, spec.height
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    if !spec.title.is_empty() {
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="24" font-family="sans-serif" font-size="16" text-anchor="middle">{}</text>"#,
            left + pw / 2.0,
            escape(&spec.title)
        );
    }
    let _ = writeln!(
        s,
        r#"<rect x="{left:.2}" y="{top:.2}" width="{pw:.2}" height="{ph:.2}" fill="none" stroke="black"/>"#
    );
    for i in 0..=5 {
        let f = i as f64 / 5.0;
        let xv = x0 + f * (x1 - x0);
        let px = left + f * pw;
        let _ = writeln!(
            s,
            r#"<line x1="{px:.2}" y1="{:.2}" x2="{px:.2}" y2="{:.2}" stroke="black"/><text x="{px:.2}" y="{:.2}" font-family="sans-serif" font-size="11" text-anchor="middle">{}</text>"#,
            top + ph,
            top + ph + 5.0,
            top + ph + 18.0,
            tick_label(xv)
        );
        let yv = y0 + f * (y1 - y0);
        let py = top + ph - f * ph;
        let label = if spec.log_y {
            format!("{:.2e}", 10f64.powf(yv))
        } else {
            tick_label(yv)
        };
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{py:.2}" x2="{left:.2}" y2="{py:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="11" text-anchor="end">{label}</text>"#,
            left - 5.0,
            left - 8.0,
            py + 4.0
        );
    }
    let x_label = spec.x_label.clone().unwrap_or_else(|| spec.x.clone());
    let y_label = spec.y_label.clone().unwrap_or_else(|| spec.y.join(", "));
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="13" text-anchor="middle">{}</text>"#,
        left + pw / 2.0,
        h - 15.0,
        escape(&x_label)
    );
    let _ = writeln!(
        s,
        r#"<text x="20" y="{:.2}" font-family="sans-serif" font-size="13" text-anchor="middle" transform="rotate(-90 20 {:.2})">{}</text>"#,
        top + ph / 2.0,
        top + ph / 2.0,
        escape(&y_label)
    );
    for (i, c) in curves.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let pts = c
            .points
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect::<Vec<_>>()
            .join(" ");
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>"#
        );
        let ly = top + 12.0 + 16.0 * i as f64;
        let lx = left + pw + 12.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="10">{}</text>"#,
            lx + 18.0,
            lx + 22.0,
            ly + 3.5,
            escape(&c.label)
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}

/// Renders a CSV file to `out`. Nothing is written on error.
pub fn render_svg(csv_path: &Path, spec: &PlotSpec, out: &Path) -> Result<()> {
    let table = Table::read(csv_path)?;
    let svg = render_table(&table, spec)?;
    write_text(out, &svg)
}

/// Number of curves in an SVG produced by [`render_table`].
pub fn count_polylines(svg: &str) -> usize {
    svg.matches("<polyline").count()
}
