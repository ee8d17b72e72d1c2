//! Result documents, CSV tables and the manifest, rendered deterministically.

use crate::error::CliError;
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::path::Path;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Text(v.to_string())
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

/// Seventeen significant digits, enough to round-trip any `f64`.
pub fn format_float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

impl std::fmt::Display for Cell {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Cell::Int(i) => write!(f, "{i}"),
            Cell::Float(x) => f.write_str(&format_float(*x)),
            Cell::Text(s) => f.write_str(s),
        }
    }
}

/// A CSV table; column headers read `name (unit)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    columns: Vec<String>,
    rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, columns: &[(&str, &str)]) -> Self {
        Self {
            name: name.to_string(),
            columns: columns.iter().map(|(n, u)| format!("{n} ({u})")).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len(), "table {}", self.name);
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn render(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::to_string).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// Key-value summary; keys are kept sorted.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Summary(Map<String, Value>);

impl Summary {
    pub fn num(&mut self, key: &str, v: f64) -> &mut Self {
        self.0.insert(key.into(), serde_json::Number::from_f64(v).map_or(Value::Null, Value::Number));
        self
    }

    pub fn int(&mut self, key: &str, v: usize) -> &mut Self {
        self.0.insert(key.into(), Value::from(v));
        self
    }

    pub fn flag(&mut self, key: &str, v: bool) -> &mut Self {
        self.0.insert(key.into(), Value::Bool(v));
        self
    }

    pub fn text(&mut self, key: &str, v: impl Into<String>) -> &mut Self {
        self.0.insert(key.into(), Value::String(v.into()));
        self
    }

    pub fn nums(&mut self, key: &str, v: &[f64]) -> &mut Self {
        let items = v
            .iter()
            .map(|&x| serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number))
            .collect();
        self.0.insert(key.into(), Value::Array(items));
        self
    }

    pub fn ints(&mut self, key: &str, v: &[usize]) -> &mut Self {
        self.0.insert(key.into(), Value::Array(v.iter().map(|&x| Value::from(x)).collect()));
        self
    }

    pub fn value(&mut self, key: &str, v: Value) -> &mut Self {
        self.0.insert(key.into(), v);
        self
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.0.get(key)
    }

    pub fn into_value(self) -> Value {
        Value::Object(self.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Value)> {
        self.0.iter()
    }
}

/// What a command produced.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    /// `None` for purely descriptive commands.
    pub verdict: Option<bool>,
    pub summary: Summary,
    pub tables: Vec<Table>,
    /// Additional plain-text artifacts, by file name.
    pub files: Vec<(String, String)>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.verdict != Some(false)
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Hash of the canonical JSON form of the effective configuration.
pub fn config_hash(config: &Value) -> String {
    sha256_hex(config.to_string().as_bytes())
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|source| CliError::Io { path, source })
}

/// Writes `result.json`, one CSV per table, the extra files and `manifest.json`.
pub fn write_outputs(dir: &Path, command: &str, config: &Value, outcome: &Outcome) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut rendered: Vec<(String, String)> = Vec::new();
    let mut result = Map::new();
    result.insert("command".into(), Value::String(command.into()));
    result.insert(
        "verdict".into(),
        match outcome.verdict {
            Some(true) => Value::String("pass".into()),
            Some(false) => Value::String("fail".into()),
            None => Value::String("none".into()),
        },
    );
    result.insert("summary".into(), outcome.summary.clone().into_value());
    result.insert(
        "tables".into(),
        Value::Array(outcome.tables.iter().map(|t| Value::String(format!("{}.csv", t.name))).collect()),
    );
    let mut text = serde_json::to_string_pretty(&Value::Object(result)).expect("JSON values always serialize");
    text.push('\n');
    rendered.push(("result.json".into(), text));
    for t in &outcome.tables {
        rendered.push((format!("{}.csv", t.name), t.render()));
    }
    rendered.extend(outcome.files.iter().cloned());

    let mut files = Map::new();
    for (name, contents) in &rendered {
        write(dir, name, contents)?;
        files.insert(name.clone(), Value::String(sha256_hex(contents.as_bytes())));
    }
    let mut manifest = Map::new();
    manifest.insert("command".into(), Value::String(command.into()));
    manifest.insert("config".into(), config.clone());
    manifest.insert("config_hash".into(), Value::String(config_hash(config)));
    manifest.insert("files".into(), Value::Object(files));
    manifest.insert("library_version".into(), Value::String(fraclat::VERSION.into()));
    manifest.insert("runner_version".into(), Value::String(env!("CARGO_PKG_VERSION").into()));
    let mut text = serde_json::to_string_pretty(&Value::Object(manifest)).expect("JSON values always serialize");
    text.push('\n');
    write(dir, "manifest.json", &text)
}

/// One line per summary key, for the terminal.
pub fn describe(outcome: &Outcome) -> String {
    let mut s = String::new();
    for (k, v) in outcome.summary.iter() {
        let _ = writeln!(s, "{k} = {v}");
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_keep_seventeen_digits() {
        assert_eq!(format_float(0.1), "1.0000000000000001e-1");
        assert_eq!(format_float(1.0), "1.0000000000000000e0");
        assert_eq!("1.0000000000000001e-1".parse::<f64>().unwrap(), 0.1);
        assert_eq!(format_float(f64::NAN), "NaN");
    }

    #[test]
    fn tables_render_headers_with_units() {
        let mut t = Table::new("demo", &[("size", "sites"), ("norm", "1")]);
        t.push(vec![Cell::from(4usize), Cell::from(0.5)]);
        assert_eq!(t.render(), "size (sites),norm (1)\n4,5.0000000000000000e-1\n");
    }

    #[test]
    fn summary_keys_are_sorted() {
        let mut s = Summary::default();
        s.num("zeta", 1.0).int("alpha", 2);
        let keys: Vec<&String> = s.iter().map(|(k, _)| k).collect();
        assert_eq!(keys, ["alpha", "zeta"]);
    }
}
