//! Tabular reports and their CSV / JSON serialization.

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use crate::error::{CliError, CliResult};

/// Significant digits used for every floating-point cell.
pub const SIGNIFICANT_DIGITS: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(CliError::Config(format!("unknown format {other:?}, expected csv or json"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
    Bool(bool),
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
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

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Int(v) => write!(f, "{v}"),
            Cell::Float(v) => f.write_str(&format_float(*v)),
            Cell::Text(v) => f.write_str(v),
            Cell::Bool(v) => write!(f, "{v}"),
        }
    }
}

/// Rounds to [`SIGNIFICANT_DIGITS`] and prints without trailing zeros.
/// Plain notation for moderate magnitudes, scientific otherwise.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific notation");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..(SIGNIFICANT_DIGITS as i32)).contains(&exp) {
        let decimals = (SIGNIFICANT_DIGITS as i32 - 1 - exp).max(0) as usize;
        trim_zeros(format!("{:.*}", decimals, x))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// Ordered rows sharing one column list.
#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    columns: Vec<&'static str>,
    rows: Vec<Vec<Cell>>,
}

/// Column that marks rows needing attention (non-converged solves, failed
/// checks).
pub const FLAG_COLUMN: &str = "flagged";

impl Report {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Report { columns, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) -> CliResult<()> {
        if row.len() != self.columns.len() {
            return Err(CliError::Config(format!(
                "row has {} cells but the report has {} columns",
                row.len(),
                self.columns.len()
            )));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn columns(&self) -> &[&'static str] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<Cell>] {
        &self.rows
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn cell(&self, row: usize, column: &str) -> Option<&Cell> {
        let j = self.columns.iter().position(|c| *c == column)?;
        self.rows.get(row).map(|r| &r[j])
    }

    /// Number of rows whose flag column is true.
    pub fn flagged(&self) -> usize {
        let Some(j) = self.columns.iter().position(|c| *c == FLAG_COLUMN) else {
            return 0;
        };
        self.rows.iter().filter(|r| r[j] == Cell::Bool(true)).count()
    }

    pub fn to_csv(&self) -> CliResult<Vec<u8>> {
        if self.is_empty() {
            return Err(CliError::EmptyReport);
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|c| c.to_string()))?;
        }
        w.into_inner().map_err(|e| CliError::Io(e.into_error()))
    }

    pub fn to_json(&self) -> CliResult<Vec<u8>> {
        if self.is_empty() {
            return Err(CliError::EmptyReport);
        }
        let rows: Vec<serde_json::Value> = self
            .rows
            .iter()
            .map(|row| {
                let obj = self
                    .columns
                    .iter()
                    .zip(row)
                    .map(|(k, c)| (k.to_string(), json_cell(c)))
                    .collect();
                serde_json::Value::Object(obj)
            })
            .collect();
        let mut out = serde_json::to_vec_pretty(&rows)?;
        out.push(b'\n');
        Ok(out)
    }

    pub fn render(&self, format: Format) -> CliResult<Vec<u8>> {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }
}

fn json_cell(c: &Cell) -> serde_json::Value {
    match c {
        Cell::Int(v) => (*v).into(),
        // Round through the printed form so both formats carry the same digits.
        Cell::Float(v) => format_float(*v)
            .parse::<f64>()
            .ok()
            .and_then(serde_json::Number::from_f64)
            .map_or(serde_json::Value::Null, serde_json::Value::Number),
        Cell::Text(v) => v.clone().into(),
        Cell::Bool(v) => (*v).into(),
    }
}

/// Writes the report to `path`, or to stdout when `path` is `None`.
pub fn emit_report(report: &Report, format: Format, path: Option<&Path>) -> CliResult<()> {
    let bytes = report.render(format)?;
    match path {
        Some(p) => std::fs::write(p, bytes).map_err(|e| CliError::Write(p.display().to_string(), e)),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(&bytes)?;
            out.flush()?;
            Ok(())
        }
    }
}
