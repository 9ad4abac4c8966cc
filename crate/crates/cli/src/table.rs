//! Result tables and their JSON and CSV renderings.
//!
//! Floats are written with 17 significant digits so every value re-parses to
//! the same binary64; non-finite values become the strings `inf`, `-inf` and
//! `NaN` in both formats.

use std::io::Write;

use serde::ser::{Serialize, SerializeMap, SerializeSeq, Serializer};
use serde_json::value::RawValue;
use serde_json::Value;

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(u64),
    Float(f64),
    Text(String),
    Bool(bool),
    Empty,
}

pub type Row = Vec<Cell>;

pub fn format_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "NaN".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

impl Cell {
    pub fn opt_u64(x: Option<u64>) -> Self {
        x.map_or(Cell::Empty, Cell::Int)
    }

    /// Cell for a config value echoed into a table.
    pub fn from_value(v: &Value) -> Self {
        match v {
            Value::Null => Cell::Empty,
            Value::Bool(b) => Cell::Bool(*b),
            Value::Number(n) => match n.as_u64() {
                Some(u) => Cell::Int(u),
                None => Cell::Float(n.as_f64().unwrap_or(f64::NAN)),
            },
            Value::String(s) => Cell::Text(s.clone()),
            other => Cell::Text(other.to_string()),
        }
    }

    fn csv_text(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Float(x) => format_float(*x),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
            Cell::Empty => String::new(),
        }
    }
}

impl Serialize for Cell {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Cell::Int(i) => s.serialize_u64(*i),
            Cell::Float(x) if x.is_finite() => RawValue::from_string(format_float(*x))
                .map_err(serde::ser::Error::custom)?
                .serialize(s),
            Cell::Float(x) => s.serialize_str(&format_float(*x)),
            Cell::Text(t) => s.serialize_str(t),
            Cell::Bool(b) => s.serialize_bool(*b),
            Cell::Empty => s.serialize_unit(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Row>,
}

struct RowRef<'a>(&'a [String], &'a Row);

impl Serialize for RowRef<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in self.0.iter().zip(self.1) {
            map.serialize_entry(k, v)?;
        }
        map.end()
    }
}

struct Rows<'a>(&'a Table);

impl Serialize for Rows<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(self.0.rows.len()))?;
        for row in &self.0.rows {
            seq.serialize_element(&RowRef(&self.0.columns, row))?;
        }
        seq.end()
    }
}

#[derive(serde::Serialize)]
struct Document<'a> {
    config: &'a Value,
    results: Rows<'a>,
    version: &'static str,
}

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn write_json<W: Write>(mut out: W, config: &Value, table: &Table) -> Result<(), CliError> {
    let doc = Document {
        config,
        results: Rows(table),
        version: VERSION,
    };
    serde_json::to_writer_pretty(&mut out, &doc).map_err(|e| CliError::Internal(e.to_string()))?;
    writeln!(out)?;
    Ok(())
}

/// CSV with a leading `# config: {...}` line, then a fixed header.
pub fn write_csv<W: Write>(mut out: W, config: &Value, table: &Table) -> Result<(), CliError> {
    writeln!(out, "# config: {config}")?;
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| CliError::Internal(e.to_string());
    w.write_record(&table.columns).map_err(csv_err)?;
    for row in &table.rows {
        w.write_record(row.iter().map(Cell::csv_text)).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip_through_text() {
        for x in [0.808, 1.0 / 3.0, 1e-300, 6.02e23, -0.0, 7.8709] {
            assert_eq!(format_float(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(format_float(0.5), "5.0000000000000000e-1");
    }

    #[test]
    fn json_numbers_keep_seventeen_digits() {
        let table = Table {
            columns: vec!["a".into(), "b".into(), "c".into()],
            rows: vec![vec![Cell::Float(0.1), Cell::Int(3), Cell::Float(f64::INFINITY)]],
        };
        let mut buf = Vec::new();
        write_json(&mut buf, &Value::Null, &table).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("\"a\": 1.0000000000000001e-1"));
        assert!(text.contains("\"c\": \"inf\""));
        let back: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(back["results"][0]["a"].as_f64(), Some(0.1));
    }
}
