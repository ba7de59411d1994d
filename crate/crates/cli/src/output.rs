//! Table-shaped output: CSV with a fixed column order and 10 significant
//! digits, or JSON rows keyed by the same column names.

use std::io::Write;

use serde_json::{json, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// One output cell.
#[derive(Debug, Clone)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
    IntList(Vec<usize>),
    FloatList(Vec<f64>),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => sig10(*v),
            Cell::Text(v) => v.clone(),
            Cell::IntList(v) => v
                .iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(";"),
            Cell::FloatList(v) => v.iter().map(|x| sig10(*x)).collect::<Vec<_>>().join(";"),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(v) => json!(v),
            Cell::Float(v) => json!(v),
            Cell::Text(v) => json!(v),
            Cell::IntList(v) => json!(v),
            Cell::FloatList(v) => json!(v),
        }
    }
}

/// Rows under a fixed header.
pub struct Table {
    pub command: &'static str,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(command: &'static str, columns: Vec<&'static str>) -> Table {
        Table {
            command,
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn write(&self, format: Format, mut out: impl Write) -> std::io::Result<()> {
        match format {
            Format::Csv => {
                writeln!(out, "{}", self.columns.join(","))?;
                for row in &self.rows {
                    let line: Vec<String> = row.iter().map(Cell::csv).collect();
                    writeln!(out, "{}", line.join(","))?;
                }
            }
            Format::Json => {
                let rows: Vec<Value> = self
                    .rows
                    .iter()
                    .map(|row| {
                        let mut obj = serde_json::Map::new();
                        for (name, cell) in self.columns.iter().zip(row) {
                            obj.insert((*name).to_string(), cell.json());
                        }
                        Value::Object(obj)
                    })
                    .collect();
                let doc = json!({
                    "command": self.command,
                    "columns": self.columns,
                    "rows": rows,
                });
                writeln!(out, "{}", serde_json::to_string_pretty(&doc)?)?;
            }
        }
        Ok(())
    }
}

/// Formats with 10 significant digits, fixed notation.
pub fn sig10(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let exponent = x.abs().log10().floor() as i32;
    let decimals = (9 - exponent).max(0) as usize;
    format!("{x:.decimals$}")
}
