//! Run reports in text and JSON form.
//!
//! Real numbers are rounded to the requested number of significant digits
//! before rendering, so both formats carry the same values.

use std::fmt::Write as _;

use chrono::{DateTime, SecondsFormat, Utc};
use serde_json::{json, Map, Value as Json};
use sha2::{Digest, Sha256};

pub const DEFAULT_PRECISION: usize = 6;

#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Real(f64),
    Int(i64),
    Text(String),
    Bool(bool),
    /// Column names and rows of cells.
    Table(Vec<String>, Vec<Vec<Value>>),
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Value::Real(v)
    }
}

impl From<usize> for Value {
    fn from(v: usize) -> Self {
        Value::Int(v as i64)
    }
}

impl From<u64> for Value {
    fn from(v: u64) -> Self {
        Value::Int(v as i64)
    }
}

impl From<bool> for Value {
    fn from(v: bool) -> Self {
        Value::Bool(v)
    }
}

impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Value::Text(v.to_string())
    }
}

impl From<String> for Value {
    fn from(v: String) -> Self {
        Value::Text(v)
    }
}

/// `x` rounded to `digits` significant digits.
pub fn round_significant(x: f64, digits: usize) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", digits.saturating_sub(1), x)
        .parse()
        .unwrap_or(x)
}

fn format_real(x: f64, digits: usize) -> String {
    let r = round_significant(x, digits);
    if r == 0.0 || !r.is_finite() || (1e-4..1e6).contains(&r.abs()) {
        format!("{r}")
    } else {
        let s = format!("{:.*e}", digits.saturating_sub(1), r);
        // drop trailing zeros of the mantissa
        match s.split_once('e') {
            Some((mantissa, exp)) if mantissa.contains('.') => {
                format!(
                    "{}e{exp}",
                    mantissa.trim_end_matches('0').trim_end_matches('.')
                )
            }
            _ => s,
        }
    }
}

fn to_json(v: &Value, digits: usize) -> Json {
    match v {
        Value::Real(x) if x.is_finite() => json!(round_significant(*x, digits)),
        Value::Real(x) => json!(x.to_string()),
        Value::Int(i) => json!(i),
        Value::Text(s) => json!(s),
        Value::Bool(b) => json!(b),
        Value::Table(columns, rows) => Json::Array(
            rows.iter()
                .map(|row| {
                    let mut obj = Map::new();
                    for (c, cell) in columns.iter().zip(row) {
                        obj.insert(c.clone(), to_json(cell, digits));
                    }
                    Json::Object(obj)
                })
                .collect(),
        ),
    }
}

fn to_text(v: &Value, digits: usize) -> String {
    match v {
        Value::Real(x) => format_real(*x, digits),
        Value::Int(i) => i.to_string(),
        Value::Text(s) => s.clone(),
        Value::Bool(b) => b.to_string(),
        Value::Table(..) => String::new(),
    }
}

fn render_table(columns: &[String], rows: &[Vec<Value>], digits: usize) -> String {
    let cells: Vec<Vec<String>> = rows
        .iter()
        .map(|r| r.iter().map(|c| to_text(c, digits)).collect())
        .collect();
    let widths: Vec<usize> = columns
        .iter()
        .enumerate()
        .map(|(j, c)| {
            cells
                .iter()
                .map(|r| r[j].len())
                .chain([c.len()])
                .max()
                .unwrap_or(0)
        })
        .collect();
    let mut out = String::new();
    let line = |out: &mut String, items: &[String]| {
        let joined: Vec<String> = items
            .iter()
            .zip(&widths)
            .map(|(s, &w)| format!("{s:>w$}"))
            .collect();
        let _ = writeln!(out, "    {}", joined.join("  "));
    };
    line(&mut out, columns);
    for r in &cells {
        line(&mut out, r);
    }
    out
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Clone, Debug)]
pub struct RunReport {
    pub command: String,
    pub input_digest: String,
    pub seed: Option<u64>,
    pub results: Vec<(String, Value)>,
    pub notes: Vec<String>,
    pub started_at: DateTime<Utc>,
    pub finished_at: DateTime<Utc>,
    pub version: &'static str,
}

impl RunReport {
    pub fn new(command: impl Into<String>, input: &[u8]) -> Self {
        let now = Utc::now();
        Self {
            command: command.into(),
            input_digest: sha256_hex(input),
            seed: None,
            results: Vec::new(),
            notes: Vec::new(),
            started_at: now,
            finished_at: now,
            version: env!("CARGO_PKG_VERSION"),
        }
    }

    pub fn push(&mut self, key: &str, value: impl Into<Value>) {
        self.results.push((key.to_string(), value.into()));
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.results.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    pub fn finish(mut self) -> Self {
        self.finished_at = Utc::now();
        self
    }

    pub fn to_json(&self, digits: usize) -> Json {
        let mut results = Map::new();
        for (k, v) in &self.results {
            results.insert(k.clone(), to_json(v, digits));
        }
        json!({
            "command": self.command,
            "input_digest": self.input_digest,
            "seed": self.seed,
            "results": results,
            "notes": self.notes,
            "started_at": self.started_at.to_rfc3339_opts(SecondsFormat::Millis, true),
            "finished_at": self.finished_at.to_rfc3339_opts(SecondsFormat::Millis, true),
            "version": self.version,
        })
    }

    pub fn to_text(&self, digits: usize) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "command: {}", self.command);
        let _ = writeln!(out, "input_digest: {}", self.input_digest);
        if let Some(seed) = self.seed {
            let _ = writeln!(out, "seed: {seed}");
        }
        for (k, v) in &self.results {
            match v {
                Value::Table(columns, rows) => {
                    let _ = writeln!(out, "{k}:");
                    out.push_str(&render_table(columns, rows, digits));
                }
                _ => {
                    let _ = writeln!(out, "{k}: {}", to_text(v, digits));
                }
            }
        }
        for n in &self.notes {
            let _ = writeln!(out, "note: {n}");
        }
        let _ = writeln!(
            out,
            "started_at: {}",
            self.started_at.to_rfc3339_opts(SecondsFormat::Millis, true)
        );
        let _ = writeln!(
            out,
            "finished_at: {}",
            self.finished_at
                .to_rfc3339_opts(SecondsFormat::Millis, true)
        );
        let _ = writeln!(out, "version: {}", self.version);
        out
    }
}
