//! Experiment reports and their files.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// A CSV payload.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        let bytes = w.into_inner().map_err(|e| std::io::Error::other(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

/// Fixed-precision rendering used in every table.
pub fn num(v: f64) -> String {
    format!("{v:.10e}")
}

/// A fitted constant, its value at half the grid step, and the relative change.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FittedConstant {
    pub name: String,
    pub value: f64,
    pub refined: Option<f64>,
    pub delta: Option<f64>,
    pub unresolved: bool,
}

impl FittedConstant {
    pub fn new(name: impl Into<String>, value: f64, refined: Option<f64>, tol: f64) -> Self {
        let delta = refined.map(|r| relative_change(value, r));
        Self {
            name: name.into(),
            value,
            refined,
            unresolved: delta.is_some_and(|d| !(d <= tol)),
            delta,
        }
    }
}

pub fn relative_change(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Extra output file (JSON or sectioned CSV) written next to the tables.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Artifact {
    pub file: String,
    #[serde(skip)]
    pub content: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub config_hash: String,
    pub seed: u64,
    pub tables: Vec<Table>,
    pub constants: Vec<FittedConstant>,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
    pub artifacts: Vec<Artifact>,
}

impl ExperimentReport {
    pub fn new(experiment: &str, config_hash: String, seed: u64) -> Self {
        Self {
            experiment: experiment.to_string(),
            config_hash,
            seed,
            tables: Vec::new(),
            constants: Vec::new(),
            checks: Vec::new(),
            notes: Vec::new(),
            artifacts: Vec::new(),
        }
    }

    pub fn check(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check {
            name: name.into(),
            passed,
            detail: detail.into(),
        });
    }

    pub fn constant(&mut self, c: FittedConstant) {
        self.constants.push(c);
    }

    pub fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }

    pub fn artifact(&mut self, file: &str, content: String) {
        self.artifacts.push(Artifact {
            file: file.to_string(),
            content,
        });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    /// Writes `report.json`, one CSV per table, the artifacts and the resolved config.
    pub fn write(&self, dir: &Path, resolved_ini: &str) -> Result<()> {
        fs::create_dir_all(dir)?;
        let mut json = serde_json::to_string_pretty(self)?;
        json.push('\n');
        fs::write(dir.join("report.json"), json)?;
        for t in &self.tables {
            fs::write(dir.join(format!("{}.csv", t.name)), t.to_csv()?)?;
        }
        for a in &self.artifacts {
            fs::write(dir.join(&a.file), &a.content)?;
        }
        fs::write(dir.join("config.resolved.ini"), resolved_ini)?;
        Ok(())
    }
}
