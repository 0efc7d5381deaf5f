//! Result tables and their CSV / JSON encodings.
//!
//! CSV files open with a `#`-prefixed header block holding the resolved
//! configuration as TOML, so stripping the prefix reproduces a config that
//! regenerates the file.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::config::{Format, RunConfig};
use crate::error::CliError;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Bool(bool),
    Text(String),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Bool(x)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(x) => sig12(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

/// `x` with 12 significant digits, trailing zeros trimmed.
pub fn sig12(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        let s = format!("{x:.decimals$}");
        let s = if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        };
        if s == "-0" {
            "0".into()
        } else {
            s
        }
    } else {
        format!("{x:.11e}")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

/// Provenance written alongside every table.
#[derive(Clone, Debug, Serialize)]
pub struct Header<'a> {
    pub command: &'a str,
    pub seed: Option<u64>,
    pub config: &'a RunConfig,
}

pub fn encode(table: &Table, header: &Header, format: Format) -> Result<Vec<u8>, CliError> {
    match format {
        Format::Csv => encode_csv(table, header),
        Format::Json => {
            #[derive(Serialize)]
            struct Doc<'a> {
                generator: String,
                #[serde(flatten)]
                header: &'a Header<'a>,
                #[serde(flatten)]
                table: &'a Table,
            }
            let doc = Doc {
                generator: generator(),
                header,
                table,
            };
            let mut out = serde_json::to_vec_pretty(&doc).map_err(|e| CliError::Config(e.to_string()))?;
            out.push(b'\n');
            Ok(out)
        }
    }
}

fn generator() -> String {
    format!("spinbattery {}", env!("CARGO_PKG_VERSION"))
}

fn encode_csv(table: &Table, header: &Header) -> Result<Vec<u8>, CliError> {
    let mut out = Vec::new();
    writeln!(out, "# {}", generator()).unwrap();
    writeln!(out, "# command: {}", header.command).unwrap();
    if let Some(seed) = header.seed {
        writeln!(out, "# seed: {seed}").unwrap();
    }
    writeln!(out, "# resolved config:").unwrap();
    let cfg = toml::to_string(header.config).map_err(|e| CliError::Config(e.to_string()))?;
    for line in cfg.lines() {
        writeln!(out, "#   {line}").unwrap();
    }
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| CliError::Config(e.to_string());
    w.write_record(&table.columns).map_err(csv_err)?;
    for row in &table.rows {
        w.write_record(row.iter().map(Cell::render)).map_err(csv_err)?;
    }
    w.into_inner().map_err(|e| CliError::Config(e.to_string()))
}

/// Writes to `path`, or to stdout when no path is given.
pub fn emit(bytes: &[u8], path: Option<&Path>) -> Result<(), CliError> {
    match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir.display(), e))?;
            }
            std::fs::write(p, bytes).map_err(|e| CliError::io(p.display(), e))
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(bytes)
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::io("<stdout>", e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(sig12(1.4492227075534170), "1.44922270755");
        assert_eq!(sig12(-0.05), "-0.05");
        assert_eq!(sig12(2.0), "2");
        assert_eq!(sig12(0.0), "0");
        assert_eq!(sig12(-1e-20), "-1.00000000000e-20");
        assert_eq!(sig12(123456789012345.0), "1.23456789012e14");
        assert_eq!(sig12(1e-7 * 1e-9 / 1e-9), "1.00000000000e-7");
    }

    #[test]
    fn csv_has_header_block_then_columns() {
        let mut t = Table::new(["J_over_h", "fidelity"]);
        t.push(vec![0.5.into(), 0.999.into()]);
        let cfg = RunConfig::default();
        let bytes = encode(
            &t,
            &Header {
                command: "fidelity-scan",
                seed: Some(3),
                config: &cfg,
            },
            Format::Csv,
        )
        .unwrap();
        let text = String::from_utf8(bytes).unwrap();
        assert!(text.contains("# seed: 3"));
        assert!(text.contains("#   [model]"));
        let data: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(data, vec!["J_over_h,fidelity", "0.5,0.999"]);
    }

    #[test]
    fn json_carries_columns_rows_and_config() {
        let mut t = Table::new(["N", "ok"]);
        t.push(vec![4usize.into(), true.into()]);
        let cfg = RunConfig::default();
        let bytes = encode(
            &t,
            &Header {
                command: "x",
                seed: None,
                config: &cfg,
            },
            Format::Json,
        )
        .unwrap();
        let v: serde_json::Value = serde_json::from_slice(&bytes).unwrap();
        assert_eq!(v["columns"][0], "N");
        assert_eq!(v["rows"][0][0], 4);
        assert_eq!(v["config"]["model"]["n_sites"], 8);
    }
}
