use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use super::{ExperimentConfig, HarnessError, OutputFormat};
use crate::Rational;

/// One table cell.
#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Int(i128),
    Bool(bool),
    Text(String),
    /// Printed as `p/q (decimal)`.
    Exact(Rational),
    /// Printed with 12 significant digits.
    Real(f64),
    Missing,
}

impl Cell {
    pub fn int(v: impl Into<i128>) -> Self {
        Cell::Int(v.into())
    }

    pub fn text(s: impl Into<String>) -> Self {
        Cell::Text(s.into())
    }

    pub fn opt_int(v: Option<usize>) -> Self {
        v.map_or(Cell::Missing, |x| Cell::Int(x as i128))
    }

    /// Text form shared by every output format.
    pub fn render(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Exact(r) => format_rational(r),
            Cell::Real(x) => format_sig12(*x),
            Cell::Missing => String::new(),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Cell::Int(v) => json!(v),
            Cell::Bool(b) => json!(b),
            Cell::Missing => Value::Null,
            other => Value::String(other.render()),
        }
    }
}

/// `p/q (d)` with `d` rounded to 12 significant digits.
pub fn format_rational(r: &Rational) -> String {
    let value = *r.numer() as f64 / *r.denom() as f64;
    format!("{}/{} ({})", r.numer(), r.denom(), format_sig12(value))
}

pub fn format_sig12(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { "0".into() } else { x.to_string() };
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (11 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

/// A named table of results.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self { name: name.into(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len(), "row width in table {}", self.name);
        self.rows.push(row);
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    Pass,
    Fail,
    Skipped,
}

impl CheckStatus {
    pub fn label(self) -> &'static str {
        match self {
            CheckStatus::Pass => "pass",
            CheckStatus::Fail => "fail",
            CheckStatus::Skipped => "skipped",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub status: CheckStatus,
    pub detail: String,
}

impl Check {
    pub fn new(name: &str, ok: bool, detail: impl Into<String>) -> Self {
        let status = if ok { CheckStatus::Pass } else { CheckStatus::Fail };
        Self { name: name.into(), status, detail: detail.into() }
    }

    pub fn skipped(name: &str, detail: impl Into<String>) -> Self {
        Self { name: name.into(), status: CheckStatus::Skipped, detail: detail.into() }
    }

    pub fn passed(&self) -> bool {
        self.status != CheckStatus::Fail
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub version: String,
    pub config: ExperimentConfig,
    pub results: Vec<Table>,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn new(config: &ExperimentConfig) -> Self {
        Self { version: crate::VERSION.into(), config: config.clone(), results: Vec::new(), checks: Vec::new() }
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn failed_checks(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed()).collect()
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.results.iter().find(|t| t.name == name)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn render(&self, format: OutputFormat) -> Result<String, HarnessError> {
        match format {
            OutputFormat::Json => self.to_json(),
            OutputFormat::Csv => self.to_csv(),
            OutputFormat::Text => Ok(self.to_text()),
        }
    }

    pub fn to_json_value(&self) -> Value {
        let mut results = Map::new();
        for t in &self.results {
            let rows = t
                .rows
                .iter()
                .map(|row| Value::Object(t.columns.iter().cloned().zip(row.iter().map(Cell::to_json)).collect()))
                .collect();
            results.insert(t.name.clone(), Value::Array(rows));
        }
        json!({
            "config": self.config.echo(),
            "results": results,
            "checks": self.checks,
            "version": self.version,
        })
    }

    pub fn to_json(&self) -> Result<String, HarnessError> {
        let mut s = serde_json::to_string_pretty(&self.to_json_value()).map_err(|e| HarnessError::Io(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }

    /// Sections separated by blank lines: the config as `key,value` rows,
    /// every result table with its header, then the checks.
    pub fn to_csv(&self) -> Result<String, HarnessError> {
        let mut out = Vec::new();
        let mut section = |name: &str, header: Vec<String>, rows: Vec<Vec<String>>| -> Result<(), HarnessError> {
            if !out.is_empty() {
                out.push(b'\n');
            }
            let mut w = csv::WriterBuilder::new().flexible(true).from_writer(Vec::new());
            let err = |e: csv::Error| HarnessError::Io(e.to_string());
            w.write_record([format!("# {name}")]).map_err(err)?;
            w.write_record(&header).map_err(err)?;
            for r in rows {
                w.write_record(&r).map_err(err)?;
            }
            out.extend(w.into_inner().map_err(|e| HarnessError::Io(e.to_string()))?);
            Ok(())
        };
        let config: Vec<Vec<String>> = self
            .config
            .echo()
            .as_object()
            .expect("config echo is an object")
            .iter()
            .map(|(k, v)| vec![k.clone(), json_scalar(v)])
            .chain(std::iter::once(vec!["version".to_string(), self.version.clone()]))
            .collect();
        section("config", vec!["key".into(), "value".into()], config)?;
        for t in &self.results {
            section(&t.name, t.columns.clone(), t.rows.iter().map(|r| r.iter().map(Cell::render).collect()).collect())?;
        }
        let checks = self.checks.iter().map(|c| vec![c.name.clone(), c.status.label().into(), c.detail.clone()]).collect();
        section("checks", vec!["name".into(), "status".into(), "detail".into()], checks)?;
        String::from_utf8(out).map_err(|e| HarnessError::Io(e.to_string()))
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "nlgame {}", self.version);
        for (k, v) in self.config.echo().as_object().expect("config echo is an object") {
            let _ = writeln!(out, "{k}: {}", json_scalar(v));
        }
        for t in &self.results {
            let _ = writeln!(out, "\n[{}]", t.name);
            let cells: Vec<Vec<String>> = t.rows.iter().map(|r| r.iter().map(Cell::render).collect()).collect();
            let widths: Vec<usize> = t
                .columns
                .iter()
                .enumerate()
                .map(|(i, c)| cells.iter().map(|r| r[i].chars().count()).chain([c.chars().count()]).max().unwrap_or(0))
                .collect();
            let line = |fields: &[String]| -> String {
                let padded: Vec<String> = fields.iter().zip(&widths).map(|(f, w)| format!("{f:<w$}")).collect();
                padded.join("  ").trim_end().to_string()
            };
            let _ = writeln!(out, "{}", line(&t.columns));
            for r in &cells {
                let _ = writeln!(out, "{}", line(r));
            }
        }
        if !self.checks.is_empty() {
            let _ = writeln!(out, "\n[checks]");
            for c in &self.checks {
                let _ = writeln!(out, "{:<7} {}: {}", c.status.label().to_uppercase(), c.name, c.detail);
            }
        }
        out
    }
}

fn json_scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}
