//! Rectangular result tables written as CSV with one `#`-prefixed JSON
//! metadata line, or as a JSON document when the output path ends in `.json`.

use std::io::Write;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Bool(bool),
}

impl Cell {
    /// Seventeen significant digits, so values round-trip exactly.
    pub fn render(&self) -> String {
        match self {
            Cell::Num(x) if x.is_finite() => format!("{x:.16e}"),
            Cell::Num(x) if x.is_nan() => "NaN".into(),
            Cell::Num(x) => if *x > 0.0 { "inf" } else { "-inf" }.into(),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Cell::Num(x) if x.is_finite() => json!(x),
            Cell::Num(_) => Value::String(self.render()),
            Cell::Int(i) => json!(i),
            Cell::Text(s) => json!(s),
            Cell::Bool(b) => json!(b),
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Num(x) => Some(*x),
            Cell::Int(i) => Some(*i as f64),
            _ => None,
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(i: usize) -> Self {
        Cell::Int(i as i64)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Bool(b)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    pub experiment: String,
    columns: Vec<(String, String)>,
    rows: Vec<Vec<Cell>>,
    pub metadata: Map<String, Value>,
}

impl ResultTable {
    /// `columns` pairs each column name with a one-line description.
    pub fn new(experiment: &str, columns: &[(&str, &str)]) -> Self {
        Self {
            experiment: experiment.to_string(),
            columns: columns
                .iter()
                .map(|(a, b)| (a.to_string(), b.to_string()))
                .collect(),
            rows: Vec::new(),
            metadata: Map::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(
            row.len(),
            self.columns.len(),
            "row width does not match the header of {}",
            self.experiment
        );
        self.rows.push(row);
    }

    pub fn meta(&mut self, key: &str, value: impl Into<Value>) {
        self.metadata.insert(key.to_string(), value.into());
    }

    pub fn columns(&self) -> Vec<&str> {
        self.columns.iter().map(|(a, _)| a.as_str()).collect()
    }

    pub fn rows(&self) -> &[Vec<Cell>] {
        &self.rows
    }

    pub fn column(&self, name: &str) -> Option<Vec<&Cell>> {
        let i = self.columns.iter().position(|(a, _)| a == name)?;
        Some(self.rows.iter().map(|r| &r[i]).collect())
    }

    fn header_json(&self, run_id: &str) -> Value {
        let wall = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs_f64())
            .unwrap_or(0.0);
        let columns: Map<String, Value> = self
            .columns
            .iter()
            .map(|(a, b)| (a.clone(), json!(b)))
            .collect();
        json!({
            "experiment": self.experiment,
            "run_id": run_id,
            "timestamp_unix": wall,
            "columns": columns,
            "metadata": self.metadata,
        })
    }

    /// CSV text; the first line is the metadata comment.
    pub fn to_csv(&self, run_id: &str) -> Result<String, CliError> {
        let mut out = format!("# {}\n", self.header_json(run_id));
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(self.columns())?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render))?;
        }
        let body = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
        out.push_str(&String::from_utf8_lossy(&body));
        Ok(out)
    }

    pub fn to_json(&self, run_id: &str) -> Value {
        let mut doc = self.header_json(run_id);
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| Value::Array(r.iter().map(Cell::to_json).collect()))
            .collect();
        doc["rows"] = Value::Array(rows);
        doc["column_order"] = json!(self.columns());
        doc
    }

    /// Writes to `path` (CSV, or JSON for a `.json` extension) or to stdout.
    pub fn write(&self, path: Option<&Path>, run_id: &str) -> Result<(), CliError> {
        match path {
            Some(p) if p.extension().is_some_and(|e| e == "json") => {
                let text = serde_json::to_string_pretty(&self.to_json(run_id))
                    .map_err(|e| CliError::Io(e.to_string()))?;
                std::fs::write(p, text + "\n")
                    .map_err(|e| CliError::Io(format!("{}: {e}", p.display())))
            }
            Some(p) => std::fs::write(p, self.to_csv(run_id)?)
                .map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
            None => {
                let text = self.to_csv(run_id)?;
                std::io::stdout()
                    .write_all(text.as_bytes())
                    .map_err(|e| CliError::Io(e.to_string()))
            }
        }
    }
}

/// Short content hash identifying a run: command, configuration and seed.
pub fn run_id(command: &str, config: &Value, seed: u64) -> String {
    let mut h = Sha256::new();
    h.update(command.as_bytes());
    h.update(config.to_string().as_bytes());
    h.update(seed.to_le_bytes());
    let digest = h.finalize();
    digest.iter().take(6).map(|b| format!("{b:02x}")).collect()
}
