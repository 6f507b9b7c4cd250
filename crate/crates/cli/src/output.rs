//! Record emission in the three output formats.

use std::io::{self, Write};

use clap::ValueEnum;
use rde_core::numerics::{format_complex, format_real};
use rde_core::Complex;
use serde_json::{Map, Value as Json};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Str(String),
    Int(i64),
    Real(f64),
    Complex(Complex),
    /// Renders as an empty CSV cell, JSON null, and is omitted in text.
    Missing,
}

impl From<&str> for Value {
    fn from(s: &str) -> Self {
        Value::Str(s.to_string())
    }
}

impl From<String> for Value {
    fn from(s: String) -> Self {
        Value::Str(s)
    }
}

impl From<usize> for Value {
    fn from(n: usize) -> Self {
        Value::Int(n as i64)
    }
}

impl From<i64> for Value {
    fn from(n: i64) -> Self {
        Value::Int(n)
    }
}

impl From<f64> for Value {
    fn from(x: f64) -> Self {
        Value::Real(x)
    }
}

impl From<Complex> for Value {
    fn from(z: Complex) -> Self {
        Value::Complex(z)
    }
}

impl<T: Into<Value>> From<Option<T>> for Value {
    fn from(v: Option<T>) -> Self {
        v.map_or(Value::Missing, Into::into)
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Field {
    key: &'static str,
    value: Value,
    /// Text output shows the value without its key.
    bare: bool,
}

/// One output line.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Record {
    fields: Vec<Field>,
}

impl Record {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn tag(mut self, key: &'static str, value: impl Into<Value>) -> Self {
        self.fields.push(Field { key, value: value.into(), bare: true });
        self
    }

    pub fn with(mut self, key: &'static str, value: impl Into<Value>) -> Self {
        self.fields.push(Field { key, value: value.into(), bare: false });
        self
    }

    fn text(&self) -> String {
        let parts: Vec<String> = self
            .fields
            .iter()
            .filter(|f| f.value != Value::Missing)
            .map(|f| {
                let v = match &f.value {
                    Value::Str(s) => s.clone(),
                    Value::Int(n) => n.to_string(),
                    Value::Real(x) => real_text(*x),
                    Value::Complex(z) => format_complex(*z),
                    Value::Missing => unreachable!(),
                };
                if f.bare {
                    v
                } else {
                    format!("{}={v}", f.key)
                }
            })
            .collect();
        parts.join(" ")
    }

    fn json(&self) -> Json {
        let mut map = Map::new();
        for f in &self.fields {
            let v = match &f.value {
                Value::Str(s) => Json::from(s.as_str()),
                Value::Int(n) => Json::from(*n),
                Value::Real(x) => Json::from(*x),
                Value::Complex(z) => Json::from(vec![z.re, z.im]),
                Value::Missing => Json::Null,
            };
            map.insert(f.key.to_string(), v);
        }
        Json::Object(map)
    }
}

fn real_text(x: f64) -> String {
    if x.is_finite() {
        format_real(x)
    } else {
        x.to_string()
    }
}

/// CSV column names: complex fields take two columns.
fn csv_header(records: &[Record]) -> Vec<(String, &'static str, bool)> {
    let mut cols: Vec<(String, &'static str, bool)> = Vec::new();
    for r in records {
        for f in &r.fields {
            let complex = matches!(f.value, Value::Complex(_));
            match cols.iter_mut().find(|(_, k, _)| *k == f.key) {
                Some(col) => col.2 |= complex,
                None => cols.push((f.key.to_string(), f.key, complex)),
            }
        }
    }
    cols
}

fn csv_cells(value: Option<&Value>, complex: bool) -> Vec<String> {
    match value {
        Some(Value::Complex(z)) => vec![format_real(z.re), format_real(z.im)],
        Some(Value::Str(s)) => vec![s.clone()],
        Some(Value::Int(n)) => vec![n.to_string()],
        Some(Value::Real(x)) => vec![real_text(*x)],
        Some(Value::Missing) | None => vec![String::new(); if complex { 2 } else { 1 }],
    }
}

pub fn emit(out: &mut dyn Write, format: Format, records: &[Record]) -> io::Result<()> {
    match format {
        Format::Text => {
            for r in records {
                writeln!(out, "{}", r.text())?;
            }
        }
        Format::Json => {
            for r in records {
                writeln!(out, "{}", r.json())?;
            }
        }
        Format::Csv => {
            if records.is_empty() {
                return Ok(());
            }
            let cols = csv_header(records);
            let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
            let header: Vec<String> =
                cols.iter()
                    .flat_map(|(name, _, complex)| {
                        if *complex {
                            vec![format!("{name}_re"), format!("{name}_im")]
                        } else {
                            vec![name.clone()]
                        }
                    })
                    .collect();
            w.write_record(&header)?;
            for r in records {
                let row: Vec<String> = cols
                    .iter()
                    .flat_map(|(_, key, complex)| {
                        let value = r.fields.iter().find(|f| f.key == *key).map(|f| &f.value);
                        csv_cells(value, *complex)
                    })
                    .collect();
                w.write_record(&row)?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn render(format: Format, records: &[Record]) -> String {
        let mut buf = Vec::new();
        emit(&mut buf, format, records).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn text_uses_bare_tags_and_skips_missing() {
        let r = Record::new().tag("case", "case7").with("R", 0.5).with("w", Value::Missing);
        assert_eq!(render(Format::Text, &[r]), "case7 R=0.5\n");
    }

    #[test]
    fn csv_splits_complex_columns() {
        let rows = [
            Record::new().with("n", 0usize).with("z", Complex::new(-1.0, 0.0)),
            Record::new().with("n", 1usize).with("z", Complex::new(0.5, -0.25)),
        ];
        assert_eq!(render(Format::Csv, &rows), "n,z_re,z_im\n0,-1,0\n1,0.5,-0.25\n");
    }

    #[test]
    fn json_arrays_for_complex() {
        let r = Record::new().with("n", 2usize).with("z", Complex::new(1.0, 2.0)).with("x", Value::Missing);
        assert_eq!(render(Format::Json, &[r]), "{\"n\":2,\"z\":[1.0,2.0],\"x\":null}\n");
    }
}
