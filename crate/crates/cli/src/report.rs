use std::fs::File;
use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::error::CliError;

/// Hex SHA-256 of the canonical JSON form of a config.
pub fn config_hash<T: Serialize>(config: &T) -> String {
    let text = serde_json::to_string(config).expect("configs serialize");
    hex::encode(Sha256::digest(text.as_bytes()))
}

#[derive(Debug, Clone, Serialize)]
pub struct Criterion {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

/// Outcome of one experiment.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub name: String,
    pub kind: String,
    pub seed: Option<u64>,
    pub config_hash: String,
    pub pass: bool,
    pub criteria: Vec<Criterion>,
    pub values: Map<String, Value>,
    #[serde(skip)]
    pub table: Option<Table>,
}

impl Report {
    pub fn new(name: &str, kind: &str, seed: Option<u64>, config_hash: String) -> Self {
        Self {
            name: name.into(),
            kind: kind.into(),
            seed,
            config_hash,
            pass: true,
            criteria: Vec::new(),
            values: Map::new(),
            table: None,
        }
    }

    pub fn value(&mut self, key: &str, v: impl Serialize) {
        self.values.insert(key.into(), serde_json::to_value(v).expect("values serialize"));
    }

    pub fn criterion(&mut self, name: &str, pass: bool, detail: String) {
        self.pass &= pass;
        self.criteria.push(Criterion { name: name.into(), pass, detail });
    }

    pub fn print(&self, out: &mut impl Write) -> std::io::Result<()> {
        writeln!(out, "[{}] {}", self.kind, self.name)?;
        for (k, v) in &self.values {
            match v {
                Value::Number(_) | Value::String(_) | Value::Bool(_) => writeln!(out, "  {k} = {v}")?,
                _ => writeln!(out, "  {k} = {}", serde_json::to_string(v).unwrap_or_default())?,
            }
        }
        for c in &self.criteria {
            writeln!(out, "  {}: {} ({})", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail)?;
        }
        Ok(())
    }

    /// Write `<name>.csv` under `dir` with the config-hash and seed header.
    pub fn write_csv(&self, dir: &Path) -> Result<(), CliError> {
        let Some(table) = &self.table else { return Ok(()) };
        let mut file = File::create(dir.join(format!("{}.csv", self.name)))?;
        let seed = self.seed.map_or_else(|| "none".to_string(), |s| s.to_string());
        writeln!(file, "# config_hash={}, seed={seed}", self.config_hash)?;
        let mut w = csv::Writer::from_writer(file);
        w.write_record(&table.header)?;
        for row in &table.rows {
            w.write_record(row)?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Serialize)]
pub struct Summary<'a> {
    pub pass: bool,
    pub experiments: &'a [Report],
}

pub fn write_summary(dir: &Path, reports: &[Report]) -> Result<(), CliError> {
    let summary = Summary { pass: reports.iter().all(|r| r.pass), experiments: reports };
    let text = serde_json::to_string_pretty(&summary).expect("summary serializes");
    std::fs::write(dir.join("summary.json"), text + "\n")?;
    Ok(())
}

/// Shortest round-trip formatting for CSV cells.
pub fn num(v: f64) -> String {
    format!("{v:?}")
}
