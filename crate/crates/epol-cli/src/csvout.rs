//! CSV emission: `#`-prefixed metadata lines carrying the resolved
//! configuration, then a header row and data rows.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};

pub struct CsvWriter {
    buffer: String,
    columns: usize,
}

impl CsvWriter {
    pub fn new(metadata: &[(String, String)], header: &[&str]) -> Self {
        let mut buffer = String::new();
        for (key, value) in metadata {
            let _ = writeln!(buffer, "# {key} = {value}");
        }
        let _ = writeln!(buffer, "{}", header.join(","));
        CsvWriter {
            buffer,
            columns: header.len(),
        }
    }

    pub fn row(&mut self, fields: &[String]) {
        debug_assert_eq!(fields.len(), self.columns);
        let _ = writeln!(self.buffer, "{}", fields.join(","));
    }

    pub fn write_to(&self, path: &Path) -> Result<()> {
        if let Some(parent) = path.parent() {
            if !parent.as_os_str().is_empty() {
                fs::create_dir_all(parent)?;
            }
        }
        fs::write(path, &self.buffer).with_context(|| format!("writing {}", path.display()))
    }

    pub fn as_str(&self) -> &str {
        &self.buffer
    }
}

/// Deterministic float rendering for CSV cells.
pub fn fmt_f64(value: f64) -> String {
    if value == value.trunc() && value.abs() < 1e15 {
        format!("{value:.1}")
    } else {
        format!("{value:.10}")
    }
}
