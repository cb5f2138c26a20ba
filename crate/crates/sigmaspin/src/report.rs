//! Report records and their JSON / CSV serialization.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRecord {
    pub scenario: String,
    pub check: String,
    /// Missing when the check itself failed to run.
    pub value: Option<f64>,
    pub tolerance: f64,
    pub pass: bool,
    pub grid_n: usize,
    /// Fitted convergence order (refinement studies only).
    pub order: Option<f64>,
    /// "exact", "slope", or null for single-grid checks.
    pub fit: Option<String>,
    pub error: Option<String>,
    /// Seconds; only filled when timing is requested so that reports stay
    /// byte-identical across runs.
    pub wall_time: Option<f64>,
}

impl ReportRecord {
    pub fn new(scenario: &str, check: &str, value: f64, tolerance: f64, grid_n: usize) -> Self {
        ReportRecord {
            scenario: scenario.to_string(),
            check: check.to_string(),
            pass: value <= tolerance,
            value: Some(value),
            tolerance,
            grid_n,
            order: None,
            fit: None,
            error: None,
            wall_time: None,
        }
    }

    pub fn failed(scenario: &str, check: &str, grid_n: usize, error: String) -> Self {
        ReportRecord {
            scenario: scenario.to_string(),
            check: check.to_string(),
            value: None,
            tolerance: 0.0,
            pass: false,
            grid_n,
            order: None,
            fit: None,
            error: Some(error),
            wall_time: None,
        }
    }
}

/// Least-squares slope of log y against log x.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let m = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / m;
    let my = ly.iter().sum::<f64>() / m;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

pub fn all_pass(records: &[ReportRecord]) -> bool {
    records.iter().all(|r| r.pass)
}

pub fn write_json(path: &Path, records: &[ReportRecord]) -> Result<()> {
    let mut s = serde_json::to_string_pretty(records)?;
    s.push('\n');
    fs::write(path, s)?;
    Ok(())
}

pub fn read_json(path: &Path) -> Result<Vec<ReportRecord>> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:e}")).unwrap_or_default()
}

/// Records as a flat CSV table with a header row.
pub fn write_records_csv(path: &Path, records: &[ReportRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["scenario", "check", "grid_n", "value", "tolerance", "pass", "order", "fit", "error"])?;
    for r in records {
        w.write_record([
            r.scenario.clone(),
            r.check.clone(),
            r.grid_n.to_string(),
            opt(r.value),
            format!("{:e}", r.tolerance),
            r.pass.to_string(),
            opt(r.order),
            r.fit.clone().unwrap_or_default(),
            r.error.clone().unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Write any table given as header plus rows.
pub fn write_table(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Human-readable summary, one line per record.
pub fn summary(records: &[ReportRecord]) -> String {
    let mut out = String::new();
    for r in records {
        let v = match (r.value, &r.error) {
            (_, Some(e)) => format!("error: {e}"),
            (Some(v), None) => format!("{v:.3e} <= {:.3e}", r.tolerance),
            (None, None) => "missing".into(),
        };
        let ord = r.order.map(|o| format!(" order {o:.2}")).unwrap_or_default();
        let fit = r.fit.as_deref().map(|f| format!(" [{f}]")).unwrap_or_default();
        out.push_str(&format!(
            "{} {:<24} {:<28} n={:<4} {v}{ord}{fit}\n",
            if r.pass { "PASS" } else { "FAIL" },
            r.scenario,
            r.check,
            r.grid_n
        ));
    }
    let passed = records.iter().filter(|r| r.pass).count();
    out.push_str(&format!("{passed}/{} passed\n", records.len()));
    out
}
