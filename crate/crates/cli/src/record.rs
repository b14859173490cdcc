//! Flat records and their JSON/CSV renderings.
//!
//! JSON numbers carry 17 significant digits (enough to round-trip an f64);
//! CSV numbers carry 12. Non-finite numbers become `null` in JSON and
//! `NaN`/`inf`/`-inf` in CSV.

use std::io::Write;

use crate::failure::Failure;

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Null,
    Bool(bool),
    Int(i64),
    Num(f64),
    Str(String),
    Object(Vec<(String, Value)>),
    Array(Vec<Value>),
}

impl From<f64> for Value {
    fn from(x: f64) -> Self {
        Value::Num(x)
    }
}

impl From<Option<f64>> for Value {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Value::Null, Value::Num)
    }
}

impl From<usize> for Value {
    fn from(x: usize) -> Self {
        Value::Int(x as i64)
    }
}

impl From<u64> for Value {
    fn from(x: u64) -> Self {
        Value::Int(x as i64)
    }
}

impl From<bool> for Value {
    fn from(x: bool) -> Self {
        Value::Bool(x)
    }
}

impl From<&str> for Value {
    fn from(x: &str) -> Self {
        Value::Str(x.to_string())
    }
}

impl From<String> for Value {
    fn from(x: String) -> Self {
        Value::Str(x)
    }
}

pub fn json_number(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "null".into()
    }
}

pub fn csv_number(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.11e}")
    } else if x.is_nan() {
        "NaN".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

impl Value {
    pub fn to_json(&self) -> String {
        let mut out = String::new();
        self.write_json(&mut out, 0);
        out
    }

    fn write_json(&self, out: &mut String, indent: usize) {
        let pad = |n: usize| "  ".repeat(n);
        match self {
            Value::Null => out.push_str("null"),
            Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
            Value::Int(i) => out.push_str(&i.to_string()),
            Value::Num(x) => out.push_str(&json_number(*x)),
            Value::Str(s) => out.push_str(&serde_json::to_string(s).expect("strings serialize")),
            Value::Object(fields) => {
                if fields.is_empty() {
                    out.push_str("{}");
                    return;
                }
                out.push_str("{\n");
                for (i, (k, v)) in fields.iter().enumerate() {
                    out.push_str(&pad(indent + 1));
                    out.push_str(&serde_json::to_string(k).expect("strings serialize"));
                    out.push_str(": ");
                    v.write_json(out, indent + 1);
                    if i + 1 < fields.len() {
                        out.push(',');
                    }
                    out.push('\n');
                }
                out.push_str(&pad(indent));
                out.push('}');
            }
            Value::Array(items) => {
                if items.is_empty() {
                    out.push_str("[]");
                    return;
                }
                out.push_str("[\n");
                for (i, v) in items.iter().enumerate() {
                    out.push_str(&pad(indent + 1));
                    v.write_json(out, indent + 1);
                    if i + 1 < items.len() {
                        out.push(',');
                    }
                    out.push('\n');
                }
                out.push_str(&pad(indent));
                out.push(']');
            }
        }
    }

    /// Rendering of a scalar inside a CSV cell.
    pub fn to_csv_cell(&self) -> String {
        match self {
            Value::Null => String::new(),
            Value::Bool(b) => b.to_string(),
            Value::Int(i) => i.to_string(),
            Value::Num(x) => csv_number(*x),
            Value::Str(s) => s.clone(),
            Value::Object(_) | Value::Array(_) => self.to_json(),
        }
    }
}

/// An ordered set of named fields; one row of a table.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Record(pub Vec<(String, Value)>);

impl Record {
    pub fn new() -> Self {
        Record(Vec::new())
    }

    pub fn push(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        self.0.push((key.to_string(), value.into()));
        self
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.0.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    pub fn into_value(self) -> Value {
        Value::Object(self.0)
    }

    pub fn header(&self) -> Vec<&str> {
        self.0.iter().map(|(k, _)| k.as_str()).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Writes records sharing one header as CSV.
pub fn write_csv(out: &mut dyn Write, rows: &[Record]) -> Result<(), Failure> {
    let mut w = csv::Writer::from_writer(out);
    if let Some(first) = rows.first() {
        w.write_record(first.header()).map_err(Failure::io)?;
    }
    for row in rows {
        w.write_record(row.0.iter().map(|(_, v)| v.to_csv_cell()))
            .map_err(Failure::io)?;
    }
    w.flush().map_err(Failure::io)
}

/// Writes a single record as a JSON object or a one-row CSV table.
pub fn write_record(out: &mut dyn Write, record: Record, format: Format) -> Result<(), Failure> {
    match format {
        Format::Json => writeln!(out, "{}", record.into_value().to_json()).map_err(Failure::io),
        Format::Csv => write_csv(out, &[record]),
    }
}

/// Writes records as a JSON array or a CSV table.
pub fn write_table(out: &mut dyn Write, rows: Vec<Record>, format: Format) -> Result<(), Failure> {
    match format {
        Format::Json => {
            let arr = Value::Array(rows.into_iter().map(Record::into_value).collect());
            writeln!(out, "{}", arr.to_json()).map_err(Failure::io)
        }
        Format::Csv => write_csv(out, &rows),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_formats() {
        assert_eq!(json_number(0.1), "1.0000000000000001e-1");
        assert_eq!(json_number(f64::NAN), "null");
        assert_eq!(csv_number(2.5), "2.50000000000e0");
        assert_eq!(csv_number(f64::NAN), "NaN");
        let x: f64 = 1.0 / 3.0;
        assert_eq!(json_number(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn json_is_parseable() {
        let mut r = Record::new();
        r.push("a", 1.5).push("b", "x\"y").push("c", Value::Null).push("d", true);
        let text = r.into_value().to_json();
        let parsed: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(parsed["a"], 1.5);
        assert_eq!(parsed["b"], "x\"y");
    }
}
