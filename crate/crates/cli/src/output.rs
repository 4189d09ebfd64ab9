//! Number formatting, CSV tables and run reports.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Duration;

use serde::Serialize;
use serde_json::Value;

use crate::error::{CliError, Result};

/// `x` with 9 significant digits, fixed notation for moderate magnitudes
/// and scientific notation otherwise.
pub fn fmt9(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    if x == 0.0 {
        return "0.00000000".into();
    }
    let sci = format!("{x:.8e}");
    let exp: i32 = sci[sci.find('e').expect("exponent") + 1..]
        .parse()
        .expect("integer exponent");
    if (-5..9).contains(&exp) {
        format!("{x:.*}", (8 - exp) as usize)
    } else {
        sci
    }
}

/// Probabilities joined by spaces, for a single CSV cell.
pub fn fmt_list(xs: &[f64]) -> String {
    xs.iter().map(|&x| fmt9(x)).collect::<Vec<_>>().join(" ")
}

/// A named CSV table; `name` doubles as the file stem in output bundles.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Self {
            name: name.into(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{}", self.header.join(","));
        for r in &self.rows {
            let _ = writeln!(out, "{}", r.join(","));
        }
        out
    }
}

/// Everything a command produced. `duration` is reported on stderr only, so
/// files written from a report depend on the inputs alone.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub command: String,
    pub version: String,
    pub config: Value,
    pub results: Value,
    pub tables: Vec<Table>,
    #[serde(skip)]
    pub duration: Duration,
    /// Set when a verification inside the command failed.
    #[serde(skip)]
    pub failed: bool,
}

impl RunReport {
    pub fn new(command: &str, config: Value) -> Self {
        Self {
            command: command.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            config,
            results: Value::Null,
            tables: Vec::new(),
            duration: Duration::ZERO,
            failed: false,
        }
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    /// All tables, separated by blank lines.
    pub fn to_csv(&self) -> String {
        self.tables
            .iter()
            .map(Table::to_csv)
            .collect::<Vec<_>>()
            .join("\n")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

fn write(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|source| CliError::Io {
        action: "write",
        path: path.into(),
        source,
    })
}

/// Writes a report to `out`, or returns the text for stdout when `out` is unset.
///
/// With `bundle`, `out` is a directory receiving one `<name>.csv` per table
/// (or `report.json`); otherwise it is a single file.
pub fn emit(
    report: &RunReport,
    format: Format,
    out: Option<&Path>,
    bundle: bool,
) -> Result<Option<String>> {
    let text = match format {
        Format::Csv => report.to_csv(),
        Format::Json => report.to_json()?,
    };
    let Some(out) = out else {
        return Ok(Some(text));
    };
    if !bundle {
        write(out, &text)?;
        return Ok(None);
    }
    std::fs::create_dir_all(out).map_err(|source| CliError::Io {
        action: "create",
        path: out.into(),
        source,
    })?;
    match format {
        Format::Csv => {
            for t in &report.tables {
                write(&out.join(format!("{}.csv", t.name)), &t.to_csv())?;
            }
        }
        Format::Json => write(&out.join("report.json"), &text)?,
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(fmt9(0.2), "0.200000000");
        assert_eq!(fmt9(0.372556249), "0.372556249");
        assert_eq!(fmt9(1.0), "1.00000000");
        assert_eq!(fmt9(-0.5), "-0.500000000");
        assert_eq!(fmt9(123.456), "123.456000");
        assert_eq!(fmt9(1.5e-7), "1.50000000e-7");
        assert_eq!(fmt9(0.0), "0.00000000");
        assert_eq!(fmt9(2.5e-5), "0.0000250000000");
    }

    #[test]
    fn csv_layout() {
        let mut t = Table::new("t", &["a", "b"]);
        t.push(vec!["1".into(), "2".into()]);
        assert_eq!(t.to_csv(), "a,b\n1,2\n");
    }
}
