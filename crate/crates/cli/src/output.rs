//! Tables and their JSON/CSV renderings.
//!
//! Floats are always written as `{:.14e}` (15 significant digits) and JSON
//! object keys are sorted, so identical input gives identical bytes.

use std::io::{self, Write};

use serde_json::ser::{CompactFormatter, Formatter};
use serde_json::{Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Str(String),
    Bool(bool),
    Null,
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::Int(v.into())
    }
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

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Str(v.to_owned())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Str(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Null, Into::into)
    }
}

pub fn format_float(v: f64) -> String {
    format!("{v:.14e}")
}

impl Cell {
    fn to_json(&self) -> Value {
        match self {
            Cell::Int(i) => Value::from(*i),
            Cell::Float(f) => serde_json::Number::from_f64(*f).map_or(Value::Null, Value::Number),
            Cell::Str(s) => Value::from(s.as_str()),
            Cell::Bool(b) => Value::from(*b),
            Cell::Null => Value::Null,
        }
    }

    fn to_csv(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Float(f) => format_float(*f),
            Cell::Str(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
            Cell::Null => String::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Table { columns, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width does not match header");
        self.rows.push(row);
    }
}

/// What goes into `meta`.
#[derive(Debug, Clone, PartialEq)]
pub struct Meta {
    pub command: &'static str,
    pub q: Vec<f64>,
    pub tolerance: Option<f64>,
    pub precision: &'static str,
}

/// Compact JSON with fixed float formatting.
struct FixedFloats;

impl Formatter for FixedFloats {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(format_float(value).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value.into())
    }

    fn write_i64<W: ?Sized + Write>(&mut self, writer: &mut W, value: i64) -> io::Result<()> {
        CompactFormatter.write_i64(writer, value)
    }
}

pub fn render_json(meta: &Meta, table: &Table) -> Vec<u8> {
    let mut m = Map::new();
    m.insert("command".into(), Value::from(meta.command));
    m.insert("q".into(), Value::Array(meta.q.iter().map(|&q| Cell::Float(q).to_json()).collect()));
    m.insert("tolerance".into(), Cell::from(meta.tolerance).to_json());
    m.insert("precision".into(), Value::from(meta.precision));
    m.insert("version".into(), Value::from(env!("CARGO_PKG_VERSION")));
    let rows: Vec<Value> = table
        .rows
        .iter()
        .map(|row| {
            let obj: Map<String, Value> =
                table.columns.iter().zip(row).map(|(k, v)| ((*k).to_owned(), v.to_json())).collect();
            Value::Object(obj)
        })
        .collect();
    let mut top = Map::new();
    top.insert("meta".into(), Value::Object(m));
    top.insert("rows".into(), Value::Array(rows));

    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, FixedFloats);
    serde::Serialize::serialize(&Value::Object(top), &mut ser).expect("writing to a Vec cannot fail");
    out.push(b'\n');
    out
}

pub fn render_csv(table: &Table) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&table.columns).expect("writing to a Vec cannot fail");
    for row in &table.rows {
        w.write_record(row.iter().map(Cell::to_csv)).expect("writing to a Vec cannot fail");
    }
    w.into_inner().expect("flushing a Vec cannot fail")
}

pub fn render(format: Format, meta: &Meta, table: &Table) -> Vec<u8> {
    match format {
        Format::Json => render_json(meta, table),
        Format::Csv => render_csv(table),
    }
}
