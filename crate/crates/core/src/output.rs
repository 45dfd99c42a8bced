//! CSV and JSON writers shared by the CLI and presets.
//!
//! Numbers are printed with [`fmt_f64`], which is deterministic and
//! round-trips through `str::parse::<f64>`.

use std::f64::consts::TAU;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::floquet::{SpectrumMeta, SpectrumResult};
use crate::link_budget::{DepthRow, DEPTH_SWEEP_HEADER};
use crate::oracle::OracleComparison;

pub const SPECTRUM_HEADER: [&str; 2] = ["detuning_hz", "population"];
pub const ORACLE_HEADER: [&str; 4] = ["detuning_hz", "pe_analytic", "pe_integrated", "abs_err"];

/// Shortest round-trip decimal; exponent form outside [1e-4, 1e15).
pub fn fmt_f64(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-4..1e15).contains(&a) || !x.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// A header plus rows of already formatted cells.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: AsRef<str>>(header: &[S]) -> Self {
        Table {
            header: header.iter().map(|s| s.as_ref().to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn push_numbers(&mut self, row: &[f64]) {
        self.rows.push(row.iter().map(|&v| fmt_f64(v)).collect());
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    pub fn to_writer<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.header)?;
        for row in &self.rows {
            if row.len() != self.header.len() {
                return Err(Error::Data(format!(
                    "row has {} cells, header has {}",
                    row.len(),
                    self.header.len()
                )));
            }
            w.write_record(row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.to_writer(&mut buf)?;
        String::from_utf8(buf).map_err(|e| Error::Data(e.to_string()))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        ensure_parent(path)?;
        let file = fs::File::create(path).map_err(|e| io_at(path, e))?;
        self.to_writer(std::io::BufWriter::new(file))
    }

    pub fn read(path: &Path) -> Result<Table> {
        let text = fs::read_to_string(path).map_err(|e| io_at(path, e))?;
        Table::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Table> {
        let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
        let header = r.headers()?.iter().map(str::to_string).collect();
        let mut rows = Vec::new();
        for rec in r.records() {
            rows.push(rec?.iter().map(str::to_string).collect());
        }
        Ok(Table { header, rows })
    }

    /// A column parsed as numbers.
    pub fn numeric_column(&self, name: &str) -> Result<Vec<f64>> {
        let idx = self
            .column_index(name)
            .ok_or_else(|| Error::Data(format!("missing column `{name}`")))?;
        self.rows
            .iter()
            .enumerate()
            .map(|(i, row)| {
                row[idx]
                    .trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Data(format!("row {}: `{}` is not a number", i + 2, row[idx])))
            })
            .collect()
    }
}

pub(crate) fn io_at(path: &Path, e: std::io::Error) -> Error {
    Error::Io(format!("{}: {e}", path.display()))
}

pub(crate) fn ensure_parent(path: &Path) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir).map_err(|e| io_at(dir, e))?;
        }
    }
    Ok(())
}

/// Pretty JSON with a trailing newline.
pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_text(path, &to_json_string(value)?)
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    ensure_parent(path)?;
    fs::write(path, text).map_err(|e| io_at(path, e))
}

/// Sidecar path for a CSV: same stem, `.json` extension.
pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("json")
}

pub fn spectrum_table(spec: &SpectrumResult) -> Table {
    let mut t = Table::new(&SPECTRUM_HEADER);
    for (d, p) in spec.detunings.iter().zip(&spec.populations) {
        t.push_numbers(&[d / TAU, *p]);
    }
    t
}

/// Spectrum CSV plus its JSON metadata sidecar.
pub fn write_spectrum(path: &Path, spec: &SpectrumResult) -> Result<()> {
    spectrum_table(spec).write(path)?;
    write_json(&sidecar_path(path), &spec.meta)
}

/// Reads back a spectrum written by [`write_spectrum`].
pub fn read_spectrum(path: &Path) -> Result<SpectrumResult> {
    let table = Table::read(path)?;
    let detunings: Vec<f64> = table.numeric_column("detuning_hz")?.iter().map(|f| f * TAU).collect();
    let populations = table.numeric_column("population")?;
    let side = sidecar_path(path);
    let meta_text = fs::read_to_string(&side).map_err(|e| io_at(&side, e))?;
    let meta: SpectrumMeta = serde_json::from_str(&meta_text)?;
    if detunings.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Data(format!("{}: detunings not strictly increasing", path.display())));
    }
    Ok(SpectrumResult {
        detunings,
        populations,
        meta,
    })
}

pub fn oracle_table(cmp: &OracleComparison) -> Table {
    let mut t = Table::new(&ORACLE_HEADER);
    for r in &cmp.rows {
        t.push_numbers(&[r.detuning / TAU, r.analytic, r.integrated, r.abs_err]);
    }
    t
}

pub fn depth_table(rows: &[DepthRow]) -> Table {
    let mut t = Table::new(&DEPTH_SWEEP_HEADER);
    for r in rows {
        t.push(r.csv_fields());
    }
    t
}
