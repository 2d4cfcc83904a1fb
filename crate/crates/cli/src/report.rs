//! Report files: key-sorted JSON with 17 significant digits, plus a CSV of
//! `(section, name, value)` rows.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize)]
pub struct ReportFile {
    pub schema_version: u32,
    pub command: String,
    pub config: Value,
    pub results: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing: Option<Timing>,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Timing {
    pub seconds: f64,
    pub workers: usize,
}

/// One CSV row.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub section: String,
    pub name: String,
    pub value: f64,
}

impl Row {
    pub fn new(section: impl Into<String>, name: impl Into<String>, value: f64) -> Self {
        Self { section: section.into(), name: name.into(), value }
    }
}

impl ReportFile {
    pub fn to_text(&self) -> Result<String, CliError> {
        let v = serde_json::to_value(self).map_err(|e| CliError::Output(e.to_string()))?;
        let mut out = String::new();
        write_value(&v, 0, &mut out, "")?;
        out.push('\n');
        Ok(out)
    }
}

/// `{:.16e}` keeps 17 significant digits, enough to round-trip any f64.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_value(v: &Value, indent: usize, out: &mut String, path: &str) -> Result<(), CliError> {
    let pad = |n: usize| "  ".repeat(n);
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                write!(out, "{i}").unwrap();
            } else if let Some(u) = n.as_u64() {
                write!(out, "{u}").unwrap();
            } else {
                let f = n.as_f64().unwrap_or(f64::NAN);
                if !f.is_finite() {
                    return Err(CliError::Output(format!("non-finite value at `{path}`")));
                }
                out.push_str(&format_float(f));
            }
        }
        Value::String(s) => out.push_str(&serde_json::to_string(s).expect("string serializes")),
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return Ok(());
            }
            out.push_str("[\n");
            for (i, item) in items.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                write_value(item, indent + 1, out, &format!("{path}[{i}]"))?;
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return Ok(());
            }
            // serde_json's default map is ordered by key
            out.push_str("{\n");
            let n = map.len();
            for (i, (k, item)) in map.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                out.push_str(&serde_json::to_string(k).expect("key serializes"));
                out.push_str(": ");
                let sub = if path.is_empty() { k.clone() } else { format!("{path}.{k}") };
                write_value(item, indent + 1, out, &sub)?;
                out.push_str(if i + 1 < n { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push('}');
        }
    }
    Ok(())
}

pub fn csv_text(rows: &[Row]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["section", "name", "value"]).map_err(|e| CliError::Output(e.to_string()))?;
    for r in rows {
        w.write_record([r.section.as_str(), r.name.as_str(), &format_float(r.value)])
            .map_err(|e| CliError::Output(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Output(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Output(e.to_string()))
}

/// Writes `<out>` and `<out>` with extension `.csv`.
pub fn write_files(out: &Path, report: &ReportFile, rows: &[Row]) -> Result<(), CliError> {
    let io = |e: std::io::Error, p: &Path| CliError::Output(format!("{}: {e}", p.display()));
    std::fs::write(out, report.to_text()?).map_err(|e| io(e, out))?;
    let csv_path = out.with_extension("csv");
    std::fs::write(&csv_path, csv_text(rows)?).map_err(|e| io(e, &csv_path))?;
    Ok(())
}
