//! Run configuration and machine-readable experiment reports.
//!
//! Reports are deterministic: rows are sorted by (p, quantity), floats are
//! printed with fixed precision, and the configuration (seed included) is
//! echoed verbatim, so identical configs produce byte-identical output.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;

pub const CODE_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Parameters shared by all commands; unset options fall back to per-command
/// defaults.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct RunConfig {
    pub n: usize,
    pub m: usize,
    pub k: u32,
    pub p_min: u32,
    pub p_max: u32,
    pub y_kind: String,
    pub eps: f64,
    pub seed: u64,
    pub quad_order: usize,
    pub tolerance: f64,
    pub out_dir: Option<String>,
    pub format: ReportFormat,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            n: 2,
            m: 1,
            k: 1,
            p_min: 6,
            p_max: 24,
            y_kind: "line".into(),
            eps: 3.0,
            seed: 17,
            quad_order: 0, // 0 = auto by dimension
            tolerance: 1e-8,
            out_dir: None,
            format: ReportFormat::Csv,
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Csv,
    Json,
}

/// One measured quantity at one p, with its theoretical target when one
/// exists. `notes` carries the provenance tag of the identity or asymptotic
/// law being exercised.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReportRow {
    pub p: u32,
    pub quantity: String,
    pub value: f64,
    pub target: Option<f64>,
    pub ratio: Option<f64>,
    pub notes: String,
}

impl ReportRow {
    pub fn new(p: u32, quantity: &str, value: f64, target: Option<f64>, notes: &str) -> Self {
        let ratio = target.and_then(|t| {
            if t.abs() > 1e-300 {
                Some(value / t)
            } else {
                None
            }
        });
        ReportRow {
            p,
            quantity: quantity.into(),
            value,
            target,
            ratio,
            notes: notes.into(),
        }
    }
}

/// Outcome of one acceptance-style check inside an experiment.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub observed: f64,
    pub threshold: String,
    pub qualitative: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FitRecord {
    pub name: String,
    pub exponent_or_rate: f64,
    pub r_squared: f64,
    pub intercept: f64,
}

/// Full experiment output: config echo, per-p rows sorted by p, fit
/// diagnostics and check summaries.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub code_version: String,
    pub config: RunConfig,
    pub rows: Vec<ReportRow>,
    pub fits: Vec<FitRecord>,
    pub checks: Vec<CheckResult>,
    pub elapsed_seconds: f64,
}

impl ExperimentReport {
    pub fn new(experiment: &str, config: RunConfig) -> Self {
        ExperimentReport {
            experiment: experiment.into(),
            code_version: CODE_VERSION.into(),
            config,
            rows: Vec::new(),
            fits: Vec::new(),
            checks: Vec::new(),
            elapsed_seconds: 0.0,
        }
    }

    pub fn sort_rows(&mut self) {
        self.rows
            .sort_by(|a, b| a.p.cmp(&b.p).then_with(|| a.quantity.cmp(&b.quantity)));
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    fn fmt_opt(v: Option<f64>) -> String {
        match v {
            Some(x) => format!("{x:.12e}"),
            None => String::new(),
        }
    }

    /// Fixed CSV schema: p,quantity,value,target,ratio,notes.
    pub fn to_csv(&self) -> Result<String> {
        let mut wtr = csv::Writer::from_writer(Vec::new());
        wtr.write_record(["p", "quantity", "value", "target", "ratio", "notes"])?;
        for r in &self.rows {
            wtr.write_record([
                r.p.to_string(),
                r.quantity.clone(),
                format!("{:.12e}", r.value),
                Self::fmt_opt(r.target),
                Self::fmt_opt(r.ratio),
                r.notes.clone(),
            ])?;
        }
        let bytes = wtr
            .into_inner()
            .map_err(|e| std::io::Error::other(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv is utf8"))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Write CSV and JSON next to each other; returns the file paths.
    pub fn write_files(&self, dir: &Path) -> Result<(std::path::PathBuf, std::path::PathBuf)> {
        std::fs::create_dir_all(dir)?;
        let csv_path = dir.join(format!("{}.csv", self.experiment));
        let json_path = dir.join(format!("{}.json", self.experiment));
        let mut f = std::fs::File::create(&csv_path)?;
        f.write_all(self.to_csv()?.as_bytes())?;
        let mut g = std::fs::File::create(&json_path)?;
        g.write_all(self.to_json()?.as_bytes())?;
        Ok((csv_path, json_path))
    }

    /// One summary line per check, for terminal output.
    pub fn summary_lines(&self) -> Vec<String> {
        self.checks
            .iter()
            .map(|c| {
                let mark = if c.passed { "pass" } else { "FAIL" };
                let qual = if c.qualitative { " [qualitative]" } else { "" };
                format!(
                    "{}: {} (observed {:.6}, requires {}){}",
                    c.name, mark, c.observed, c.threshold, qual
                )
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_schema_and_determinism() {
        let mut rep = ExperimentReport::new("demo", RunConfig::default());
        rep.rows.push(ReportRow::new(8, "b", 2.0, Some(1.0), "x"));
        rep.rows.push(ReportRow::new(6, "a", 1.0, None, "y"));
        rep.sort_rows();
        let csv1 = rep.to_csv().unwrap();
        let csv2 = rep.to_csv().unwrap();
        assert_eq!(csv1, csv2);
        let mut lines = csv1.lines();
        assert_eq!(lines.next().unwrap(), "p,quantity,value,target,ratio,notes");
        assert!(lines.next().unwrap().starts_with("6,a,"));
        assert!(lines.next().unwrap().starts_with("8,b,2.0"));
    }

    #[test]
    fn json_round_trip() {
        let rep = ExperimentReport::new("demo", RunConfig::default());
        let s = rep.to_json().unwrap();
        let back: ExperimentReport = serde_json::from_str(&s).unwrap();
        assert_eq!(back.experiment, "demo");
        assert_eq!(back.config, rep.config);
    }
}
