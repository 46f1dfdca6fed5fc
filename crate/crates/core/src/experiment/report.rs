use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::config::TableFormat;
use crate::Result;

/// How a residual is compared with its tolerance.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// residual < tolerance
    Lt,
    /// residual ≤ tolerance
    Le,
    /// residual > tolerance (negative controls)
    Gt,
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub suite: &'static str,
    pub identity: String,
    pub residual: f64,
    pub tolerance: f64,
    pub relation: Relation,
    pub pass: bool,
}

impl Check {
    pub fn new(suite: &'static str, identity: impl Into<String>, residual: f64, tolerance: f64, relation: Relation) -> Self {
        let pass = match relation {
            Relation::Lt => residual < tolerance,
            Relation::Le => residual <= tolerance,
            Relation::Gt => residual > tolerance,
        };
        Check { suite, identity: identity.into(), residual, tolerance, relation, pass }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Constant {
    pub suite: &'static str,
    pub name: String,
    pub value: serde_json::Value,
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectrumRow {
    pub suite: &'static str,
    pub label: &'static str,
    pub index: usize,
    pub eigenvalue: f64,
    pub residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct KernelRow {
    pub suite: &'static str,
    pub m1: usize,
    pub m2: usize,
    pub component: usize,
    pub value: f64,
}

/// Everything one suite produces.
#[derive(Clone, Debug, Default)]
pub struct SuiteOutcome {
    pub checks: Vec<Check>,
    pub constants: Vec<Constant>,
    pub spectra: Vec<SpectrumRow>,
    pub kernels: Vec<KernelRow>,
}

impl SuiteOutcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn extend(&mut self, other: SuiteOutcome) {
        self.checks.extend(other.checks);
        self.constants.extend(other.constants);
        self.spectra.extend(other.spectra);
        self.kernels.extend(other.kernels);
    }
}

#[derive(Serialize)]
#[serde(tag = "record", rename_all = "snake_case")]
enum Line<'a> {
    Header {
        schema_version: u32,
        tool_version: &'static str,
        suite: &'a str,
        seed: u64,
        config_sha256: &'a str,
        config: &'a str,
    },
    Check(&'a Check),
    Constant(&'a Constant),
    Summary { checks: usize, failed: usize, pass: bool },
}

pub fn config_hash(text: &str) -> String {
    Sha256::digest(text.as_bytes()).iter().fold(String::new(), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// JSON-lines report: header, one line per check, one per constant, summary.
pub fn render_report(outcome: &SuiteOutcome, suite: &str, seed: u64, config_text: &str) -> Result<String> {
    let hash = config_hash(config_text);
    let mut lines = vec![Line::Header {
        schema_version: super::config::SCHEMA_VERSION,
        tool_version: env!("CARGO_PKG_VERSION"),
        suite,
        seed,
        config_sha256: &hash,
        config: config_text,
    }];
    lines.extend(outcome.checks.iter().map(Line::Check));
    lines.extend(outcome.constants.iter().map(Line::Constant));
    let failed = outcome.checks.iter().filter(|c| !c.pass).count();
    lines.push(Line::Summary { checks: outcome.checks.len(), failed, pass: failed == 0 });
    let mut out = String::new();
    for l in &lines {
        out.push_str(&serde_json::to_string(l).map_err(|e| crate::Error::Internal(e.to_string()))?);
        out.push('\n');
    }
    Ok(out)
}

fn render_table<T: Serialize>(rows: &[T], header: &[&str], csv_row: impl Fn(&T) -> String, format: TableFormat) -> Result<String> {
    let mut out = String::new();
    match format {
        TableFormat::Csv => {
            out.push_str(&header.join(","));
            out.push('\n');
            for r in rows {
                out.push_str(&csv_row(r));
                out.push('\n');
            }
        }
        TableFormat::JsonLines => {
            for r in rows {
                out.push_str(&serde_json::to_string(r).map_err(|e| crate::Error::Internal(e.to_string()))?);
                out.push('\n');
            }
        }
    }
    Ok(out)
}

pub fn render_spectra(rows: &[SpectrumRow], format: TableFormat) -> Result<String> {
    render_table(
        rows,
        &["suite", "label", "index", "eigenvalue", "residual"],
        |r| format!("{},{},{},{:e},{:e}", r.suite, r.label, r.index, r.eigenvalue, r.residual),
        format,
    )
}

pub fn render_kernels(rows: &[KernelRow], format: TableFormat) -> Result<String> {
    render_table(
        rows,
        &["suite", "m1", "m2", "component", "value"],
        |r| format!("{},{},{},{},{:e}", r.suite, r.m1, r.m2, r.component, r.value),
        format,
    )
}

/// Writes report.jsonl plus spectra and kernels tables into `dir`; returns the file names.
pub fn emit(dir: &Path, report: &str, outcome: &SuiteOutcome, format: TableFormat) -> Result<Vec<String>> {
    fs::create_dir_all(dir)?;
    let ext = match format {
        TableFormat::Csv => "csv",
        TableFormat::JsonLines => "jsonl",
    };
    let files = [
        ("report.jsonl".to_string(), report.to_string()),
        (format!("spectra.{ext}"), render_spectra(&outcome.spectra, format)?),
        (format!("kernels.{ext}"), render_kernels(&outcome.kernels, format)?),
    ];
    for (name, body) in &files {
        fs::write(dir.join(name), body)?;
    }
    Ok(files.into_iter().map(|(n, _)| n).collect())
}
