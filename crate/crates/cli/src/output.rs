//! JSON run reports and CSV writing.

use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::CliError;

pub const SCHEMA: u32 = 1;

/// Tool version in `git describe` style.
pub fn version() -> String {
    format!("v{}", env!("CARGO_PKG_VERSION"))
}

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub schema: u32,
    pub tool: &'static str,
    pub version: String,
    pub command: &'static str,
    pub seed: u64,
    pub config: Value,
    pub metrics: Value,
    pub errors: Vec<String>,
    pub warnings: Vec<String>,
    pub outputs: Vec<String>,
    pub duration_s: f64,
}

impl RunReport {
    pub fn new(command: &'static str, seed: u64) -> Self {
        Self {
            schema: SCHEMA,
            tool: "jpa-forge",
            version: version(),
            command,
            seed,
            config: Value::Null,
            metrics: Value::Null,
            errors: Vec::new(),
            warnings: Vec::new(),
            outputs: Vec::new(),
            duration_s: 0.0,
        }
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(self).map_err(|e| CliError::Config(e.to_string()))?;
        text.push('\n');
        std::fs::write(path, text)?;
        Ok(())
    }
}

pub fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report values serialize")
}

/// Round-trip float formatting; scientific outside [1e-4, 1e6).
pub fn num(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-4..1e6).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

pub fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(header).map_err(csv_err)?;
    for r in rows {
        w.write_record(r).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> CliError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => CliError::Io(io),
        other => CliError::Config(format!("{other:?}")),
    }
}

pub fn out_path(dir: &Path, name: &str) -> PathBuf {
    dir.join(name)
}
