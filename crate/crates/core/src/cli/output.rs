//! CSV and JSON emitters and the matching CSV reader.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::{Error, Result};

/// One CSV cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Count(u64),
    Text(String),
    Empty,
}

impl Cell {
    fn render(&self, out: &mut String) {
        match self {
            // 17 significant digits round-trip every double
            Cell::Float(v) => write!(out, "{v:.16e}").expect("string write"),
            Cell::Count(v) => write!(out, "{v}").expect("string write"),
            Cell::Text(s) => out.push_str(s),
            Cell::Empty => {}
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Float)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Count(v)
    }
}

/// Renders `# run_id=<id>`, the header and the rows.
pub fn render_csv(run_id: &str, header: &[&str], rows: &[Vec<Cell>]) -> String {
    let mut w = csv::Writer::from_writer(format!("# run_id={run_id}\n").into_bytes());
    w.write_record(header).expect("in-memory write");
    let mut buf = String::new();
    for row in rows {
        debug_assert_eq!(row.len(), header.len());
        let fields: Vec<String> = row
            .iter()
            .map(|c| {
                buf.clear();
                c.render(&mut buf);
                buf.clone()
            })
            .collect();
        w.write_record(&fields).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn write_csv(path: &Path, run_id: &str, header: &[&str], rows: &[Vec<Cell>]) -> Result<()> {
    write_text(path, &render_csv(run_id, header, rows))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Domain(e.to_string()))?;
    text.push('\n');
    write_text(path, &text)
}

/// A CSV file as written by [`write_csv`].
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub run_id: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn read(path: &Path) -> Result<Self> {
        let text = match std::fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                return Err(Error::MissingInput(format!("{} not found", path.display())))
            }
            Err(e) => return Err(Error::io(path, e)),
        };
        let bad = || Error::MissingInput(format!("{} is not a run CSV", path.display()));
        let (first, rest) = text.split_once('\n').ok_or_else(bad)?;
        let run_id = first.strip_prefix("# run_id=").ok_or_else(bad)?.to_string();
        let mut reader = csv::Reader::from_reader(rest.as_bytes());
        let header: Vec<String> = reader.headers().map_err(|_| bad())?.iter().map(str::to_string).collect();
        let rows = reader
            .records()
            .map(|r| r.map(|rec| rec.iter().map(str::to_string).collect::<Vec<_>>()))
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| bad())?;
        Ok(Self { run_id, header, rows })
    }

    pub fn has_column(&self, name: &str) -> bool {
        self.header.iter().any(|h| h == name)
    }

    /// Column `name`; empty cells become `None`.
    pub fn column(&self, name: &str) -> Result<Vec<Option<f64>>> {
        let i = self
            .header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingInput(format!("column {name} missing")))?;
        self.rows
            .iter()
            .map(|r| {
                let s = &r[i];
                if s.is_empty() {
                    Ok(None)
                } else {
                    s.parse::<f64>()
                        .map(Some)
                        .map_err(|_| Error::MissingInput(format!("column {name}: bad number {s}")))
                }
            })
            .collect()
    }

    /// Column `name` with every cell present.
    pub fn dense_column(&self, name: &str) -> Result<Vec<f64>> {
        self.column(name)?
            .into_iter()
            .map(|v| v.ok_or_else(|| Error::MissingInput(format!("column {name} has empty cells"))))
            .collect()
    }
}
