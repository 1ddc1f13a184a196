//! CSV and JSON writers. Numbers carry 17 significant digits.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::CliError;

pub fn number(v: f64) -> String {
    format!("{v:.16e}")
}

/// `<out>.config.json`.
pub fn sidecar_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".config.json");
    PathBuf::from(name)
}

/// A header plus rows of cells, written with the `csv` crate.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: Vec<String>) -> Self {
        Self { header, rows: Vec::new() }
    }

    pub fn push_numbers(&mut self, values: &[f64]) {
        self.rows.push(values.iter().map(|&v| number(v)).collect());
    }

    fn write_to<W: Write>(&self, sink: W) -> Result<(), CliError> {
        let mut w = csv::Writer::from_writer(sink);
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Writes to `out`, or to stdout when no path is given.
    pub fn write(&self, out: Option<&Path>) -> Result<(), CliError> {
        match out {
            Some(path) => {
                create_parent(path)?;
                self.write_to(std::fs::File::create(path)?)
            }
            None => self.write_to(std::io::stdout().lock()),
        }
    }
}

pub fn write_json<T: Serialize>(value: &T, out: Option<&Path>) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    match out {
        Some(path) => {
            create_parent(path)?;
            std::fs::write(path, text)?;
        }
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

/// Writes the resolved configuration next to an artifact.
pub fn write_sidecar<T: Serialize>(config: &T, out: Option<&Path>) -> Result<(), CliError> {
    if let Some(path) = out {
        write_json(config, Some(&sidecar_path(path)))?;
    }
    Ok(())
}

fn create_parent(path: &Path) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip_exactly() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 123456.789] {
            assert_eq!(number(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(number(f64::NAN), "NaN");
    }

    #[test]
    fn sidecar_appends_suffix() {
        assert_eq!(sidecar_path(Path::new("a/b.csv")), PathBuf::from("a/b.csv.config.json"));
    }
}
