//! Column-ordered tables written as CSV or as a JSON array of records.

use std::io::Write;

use serde::ser::{SerializeMap, SerializeSeq};
use serde::{Serialize, Serializer};

use crate::failure::Failure;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Bool(bool),
    Text(String),
}

impl Cell {
    /// CSV text: floats carry 17 significant digits.
    pub fn render(&self) -> String {
        match self {
            Cell::Float(x) if x.is_finite() => format!("{x:.16e}"),
            Cell::Float(x) if x.is_nan() => "nan".into(),
            Cell::Float(x) if *x > 0.0 => "inf".into(),
            Cell::Float(_) => "-inf".into(),
            Cell::Int(n) => n.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<usize> for Cell {
    fn from(n: usize) -> Self {
        Cell::Int(n as i64)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Bool(b)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_owned())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl Serialize for Cell {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            // Same 17 digits as the CSV; non-finite values become null.
            Cell::Float(x) if x.is_finite() => {
                let rounded: f64 = format!("{x:.16e}").parse().unwrap_or(*x);
                s.serialize_f64(rounded)
            }
            Cell::Float(_) => s.serialize_none(),
            Cell::Int(n) => s.serialize_i64(*n),
            Cell::Bool(b) => s.serialize_bool(*b),
            Cell::Text(t) => s.serialize_str(t),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn write<W: Write>(&self, out: W, format: Format) -> Result<(), Failure> {
        match format {
            Format::Csv => {
                let mut w = csv::Writer::from_writer(out);
                w.write_record(&self.columns)?;
                for row in &self.rows {
                    w.write_record(row.iter().map(Cell::render))?;
                }
                w.flush()?;
            }
            Format::Json => {
                let mut out = out;
                serde_json::to_writer_pretty(&mut out, self)?;
                writeln!(out)?;
            }
        }
        Ok(())
    }
}

struct Record<'a> {
    columns: &'a [&'static str],
    cells: &'a [Cell],
}

impl Serialize for Record<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.columns.len()))?;
        for (k, v) in self.columns.iter().zip(self.cells) {
            map.serialize_entry(k, v)?;
        }
        map.end()
    }
}

impl Serialize for Table {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(self.rows.len()))?;
        for row in &self.rows {
            seq.serialize_element(&Record {
                columns: &self.columns,
                cells: row,
            })?;
        }
        seq.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Table {
        let mut t = Table::new(&["theta", "method", "ok", "tau"]);
        t.push(vec![0.1.into(), "direct_quadrature".into(), true.into(), f64::INFINITY.into()]);
        t
    }

    #[test]
    fn csv_format() {
        let mut buf = Vec::new();
        sample().write(&mut buf, Format::Csv).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "theta,method,ok,tau\n1.0000000000000001e-1,direct_quadrature,true,inf\n"
        );
    }

    #[test]
    fn json_keys_follow_columns() {
        let mut buf = Vec::new();
        sample().write(&mut buf, Format::Json).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let a = text.find("\"theta\"").unwrap();
        let b = text.find("\"method\"").unwrap();
        assert!(a < b);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v[0]["theta"], serde_json::json!(0.1));
        assert!(v[0]["tau"].is_null());
    }
}
