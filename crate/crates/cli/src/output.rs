//! CSV and manifest serialization.
//!
//! Floats are written with Rust's shortest round-trip formatting: the
//! printed decimal parses back to the exact bit pattern the library
//! produced, locale-independent, `.` as the decimal separator.

use serde::Serialize;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

pub fn fmt_f64(value: f64) -> String {
    // Fold -0.0 into 0 so equal values serialize identically.
    if value == 0.0 {
        return "0".to_string();
    }
    format!("{value}")
}

/// A CSV table with a one-line header.
pub struct Table {
    header: String,
    rows: Vec<String>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            header: columns.join(","),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, cells: &[String]) {
        self.rows.push(cells.join(","));
    }

    pub fn write_to(&self, path: &Path) -> std::io::Result<()> {
        let mut out = String::with_capacity((self.rows.len() + 1) * 32);
        out.push_str(&self.header);
        out.push('\n');
        for row in &self.rows {
            out.push_str(row);
            out.push('\n');
        }
        fs::write(path, out)
    }
}

/// Run metadata written next to the data files.
#[derive(Debug, Serialize)]
pub struct Manifest {
    pub artifact_version: &'static str,
    pub scenario: String,
    pub seed: u64,
    pub config_sha256: String,
    pub outputs: Vec<String>,
}

impl Manifest {
    pub fn write_to(&self, path: &Path) -> std::io::Result<()> {
        let mut file = fs::File::create(path)?;
        let json = serde_json::to_string_pretty(self).expect("manifest serializes");
        writeln!(file, "{json}")
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    use sha2::{Digest, Sha256};
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Joins `out_dir` with a fixed output file name.
pub fn out_path(out_dir: &Path, name: &str) -> PathBuf {
    out_dir.join(name)
}
