//! Plot-ready tables with CSV and JSON encodings.
//!
//! CSV numbers use Rust's shortest round-trip formatting, so equal data
//! always produce identical bytes. Missing cells are empty in CSV and
//! `null` in JSON.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Number(f64),
    Text(String),
    Missing,
}

impl Value {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Number(x) => Some(*x),
            _ => None,
        }
    }

    fn to_csv_field(&self) -> String {
        match self {
            Value::Number(x) => format!("{x}"),
            Value::Text(s) => s.clone(),
            Value::Missing => String::new(),
        }
    }

    fn from_csv_field(s: &str) -> Self {
        if s.is_empty() {
            Value::Missing
        } else if let Ok(x) = s.parse::<f64>() {
            Value::Number(x)
        } else {
            Value::Text(s.to_string())
        }
    }
}

impl From<f64> for Value {
    fn from(x: f64) -> Self {
        Value::Number(x)
    }
}

impl From<Option<f64>> for Value {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Value::Missing, Value::Number)
    }
}

impl From<&str> for Value {
    fn from(s: &str) -> Self {
        Value::Text(s.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::Config(format!("unknown format {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(columns: Vec<String>) -> Self {
        Self { columns, rows: Vec::new() }
    }

    pub fn push_row<V: Into<Value>>(&mut self, row: Vec<V>) {
        assert_eq!(row.len(), self.columns.len(), "row width differs from header");
        self.rows.push(row.into_iter().map(Into::into).collect());
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Numeric values of one column; missing or text cells are skipped.
    pub fn numbers(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.column_index(name)?;
        Some(self.rows.iter().filter_map(|r| r[k].as_f64()).collect())
    }

    /// Prepends constant key columns to every row.
    pub fn with_keys(self, keys: &[(&str, Value)]) -> Self {
        let mut columns: Vec<String> = keys.iter().map(|(k, _)| k.to_string()).collect();
        columns.extend(self.columns);
        let rows = self
            .rows
            .into_iter()
            .map(|r| keys.iter().map(|(_, v)| v.clone()).chain(r).collect())
            .collect();
        Self { columns, rows }
    }

    /// Stacks tables, taking the union of their columns in first-seen
    /// order. Cells absent from a part are left missing.
    pub fn concat(parts: Vec<Table>) -> Self {
        let mut columns: Vec<String> = Vec::new();
        for p in &parts {
            for c in &p.columns {
                if !columns.contains(c) {
                    columns.push(c.clone());
                }
            }
        }
        let mut out = Table::new(columns.clone());
        for p in parts {
            let map: Vec<usize> = p.columns.iter().map(|c| columns.iter().position(|d| d == c).unwrap()).collect();
            for row in p.rows {
                let mut full = vec![Value::Missing; columns.len()];
                for (v, &k) in row.into_iter().zip(&map) {
                    full[k] = v;
                }
                out.rows.push(full);
            }
        }
        out
    }

    /// Moves the named column, if present, to the right end.
    pub fn move_column_last(mut self, name: &str) -> Self {
        if let Some(k) = self.column_index(name) {
            let c = self.columns.remove(k);
            self.columns.push(c);
            for row in &mut self.rows {
                let v = row.remove(k);
                row.push(v);
            }
        }
        self
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Value::to_csv_field))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut r = csv::Reader::from_reader(text.as_bytes());
        let columns: Vec<String> = r.headers()?.iter().map(String::from).collect();
        let mut table = Table::new(columns);
        for record in r.records() {
            let record = record?;
            table.rows.push(record.iter().map(Value::from_csv_field).collect());
        }
        Ok(table)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let t: Table = serde_json::from_str(text)?;
        if t.rows.iter().any(|r| r.len() != t.columns.len()) {
            return Err(Error::Config("table row width differs from header".into()));
        }
        Ok(t)
    }

    pub fn encode(&self, format: Format) -> Result<String> {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }

    pub fn decode(text: &str, format: Format) -> Result<Self> {
        match format {
            Format::Csv => Self::from_csv(text),
            Format::Json => Self::from_json(text),
        }
    }
}
