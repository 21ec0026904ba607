//! Report records and their CSV and JSON encodings.
//!
//! Reals are written as `{:.16e}` (17 significant digits) in both encodings,
//! so every value round-trips through either one. Non-finite reals become
//! JSON `null` and an empty CSV field.

use serde::Serialize;
use serde_json::Value;

use crate::CliError;

/// A report value.
#[derive(Debug, Clone, PartialEq)]
pub enum Val {
    Null,
    Bool(bool),
    Int(i64),
    UInt(u64),
    Real(f64),
    Text(String),
    List(Vec<Val>),
    Map(Vec<(String, Val)>),
}

impl Val {
    /// Converts any serializable value.
    pub fn of<T: Serialize + ?Sized>(value: &T) -> Result<Val, CliError> {
        serde_json::to_value(value)
            .map(Val::from)
            .map_err(|e| CliError::Output(format!("cannot encode report value: {e}")))
    }
}

impl From<Value> for Val {
    fn from(v: Value) -> Self {
        match v {
            Value::Null => Val::Null,
            Value::Bool(b) => Val::Bool(b),
            Value::Number(n) => {
                if let Some(u) = n.as_u64() {
                    Val::UInt(u)
                } else if let Some(i) = n.as_i64() {
                    Val::Int(i)
                } else {
                    Val::Real(n.as_f64().unwrap_or(f64::NAN))
                }
            }
            Value::String(s) => Val::Text(s),
            Value::Array(a) => Val::List(a.into_iter().map(Val::from).collect()),
            Value::Object(o) => Val::Map(o.into_iter().map(|(k, v)| (k, Val::from(v))).collect()),
        }
    }
}

impl From<f64> for Val {
    fn from(x: f64) -> Self {
        Val::Real(x)
    }
}

impl From<u64> for Val {
    fn from(x: u64) -> Self {
        Val::UInt(x)
    }
}

impl From<bool> for Val {
    fn from(x: bool) -> Self {
        Val::Bool(x)
    }
}

impl From<&str> for Val {
    fn from(x: &str) -> Self {
        Val::Text(x.to_string())
    }
}

impl From<String> for Val {
    fn from(x: String) -> Self {
        Val::Text(x)
    }
}

/// `x` with 17 significant digits, or `None` when not finite.
pub fn fmt_real(x: f64) -> Option<String> {
    x.is_finite().then(|| format!("{x:.16e}"))
}

fn write_json(v: &Val, out: &mut String) {
    match v {
        Val::Null => out.push_str("null"),
        Val::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Val::Int(i) => out.push_str(&i.to_string()),
        Val::UInt(u) => out.push_str(&u.to_string()),
        Val::Real(x) => out.push_str(fmt_real(*x).as_deref().unwrap_or("null")),
        Val::Text(s) => out.push_str(&serde_json::to_string(s).expect("strings encode")),
        Val::List(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_json(item, out);
            }
            out.push(']');
        }
        Val::Map(entries) => {
            out.push('{');
            for (i, (k, item)) in entries.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&serde_json::to_string(k).expect("strings encode"));
                out.push(':');
                write_json(item, out);
            }
            out.push('}');
        }
    }
}

/// Compact JSON text of a value.
pub fn to_json(v: &Val) -> String {
    let mut out = String::new();
    write_json(v, &mut out);
    out
}

/// Text of a value inside one CSV field. Lists are joined with `;`.
fn csv_field(v: &Val) -> String {
    match v {
        Val::Null => String::new(),
        Val::Real(x) => fmt_real(*x).unwrap_or_default(),
        Val::Text(s) => s.clone(),
        Val::List(items) => items.iter().map(csv_field).collect::<Vec<_>>().join(";"),
        other => to_json(other),
    }
}

/// Flattens nested maps into dotted keys, preserving field order.
fn flatten(prefix: &str, v: Val, out: &mut Vec<(String, Val)>) {
    match v {
        Val::Map(entries) => {
            for (k, item) in entries {
                let key = if prefix.is_empty() { k } else { format!("{prefix}.{k}") };
                flatten(&key, item, out);
            }
        }
        other => out.push((prefix.to_string(), other)),
    }
}

/// One command's output: echo of the configuration, summary fields and a table.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub command: String,
    /// Arguments that reproduce this report.
    pub argv: Vec<String>,
    pub config: Val,
    pub summary: Vec<(String, Val)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Val>>,
}

impl Report {
    pub fn new(command: &str, argv: Vec<String>, config: Val) -> Self {
        Self { command: command.to_string(), argv, config, summary: Vec::new(), columns: Vec::new(), rows: Vec::new() }
    }

    pub fn summary(mut self, key: &str, value: impl Into<Val>) -> Self {
        self.summary.push((key.to_string(), value.into()));
        self
    }

    /// Adds serializable records as table rows. Nested fields become dotted
    /// columns; a field missing from a record is null.
    pub fn rows<T: Serialize>(mut self, records: &[T]) -> Result<Self, CliError> {
        for record in records {
            let mut flat = Vec::new();
            flatten("", Val::of(record)?, &mut flat);
            for (k, _) in &flat {
                if !self.columns.contains(k) {
                    self.columns.push(k.clone());
                    self.rows.iter_mut().for_each(|r| r.push(Val::Null));
                }
            }
            let row = self
                .columns
                .iter()
                .map(|c| flat.iter().find(|(k, _)| k == c).map_or(Val::Null, |(_, v)| v.clone()))
                .collect();
            self.rows.push(row);
        }
        Ok(self)
    }

    /// One JSON object with keys `command`, `argv`, `config`, `summary`, `rows`.
    pub fn to_json(&self) -> String {
        let rows = self
            .rows
            .iter()
            .map(|r| Val::Map(self.columns.iter().cloned().zip(r.iter().cloned()).collect()))
            .collect();
        let obj = Val::Map(vec![
            ("command".into(), Val::Text(self.command.clone())),
            ("argv".into(), Val::List(self.argv.iter().cloned().map(Val::Text).collect())),
            ("config".into(), self.config.clone()),
            ("summary".into(), Val::Map(self.summary.clone())),
            ("rows".into(), Val::List(rows)),
        ]);
        let mut s = to_json(&obj);
        s.push('\n');
        s
    }

    /// `#` comment lines for command, argv, config and summary, then a header
    /// row and one record per table row.
    pub fn to_csv(&self) -> Result<String, CliError> {
        let mut head = String::new();
        head.push_str(&format!("# command={}\n", self.command));
        let argv = Val::List(self.argv.iter().cloned().map(Val::Text).collect());
        head.push_str(&format!("# argv={}\n", to_json(&argv)));
        head.push_str(&format!("# config={}\n", to_json(&self.config)));
        for (k, v) in &self.summary {
            head.push_str(&format!("# summary.{k}={}\n", csv_field(v)));
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        let err = |e: csv::Error| CliError::Output(e.to_string());
        if !self.columns.is_empty() {
            w.write_record(&self.columns).map_err(err)?;
            for row in &self.rows {
                w.write_record(row.iter().map(csv_field)).map_err(err)?;
            }
        }
        let body = w.into_inner().map_err(|e| CliError::Output(e.to_string()))?;
        head.push_str(&String::from_utf8(body).expect("csv output is utf-8"));
        Ok(head)
    }
}
