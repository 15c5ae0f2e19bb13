//! Success-rate tables over run summaries.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use hrm_core::TaskKind;
use serde::{Deserialize, Serialize};

use crate::run::{RunSummary, SUMMARY_SCHEMA};

pub const REPORT_SCHEMA: &str = "hrm-report/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReportFormat {
    #[default]
    Table,
    Machine,
}

impl std::str::FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "table" => Ok(Self::Table),
            "machine" => Ok(Self::Machine),
            other => Err(format!(
                "unknown format `{other}` (expected table or machine)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub task: TaskKind,
    pub source: String,
    pub episodes: usize,
    pub successes: usize,
    pub success_rate: f64,
    pub mean_steps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedFile {
    pub source: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub rows: Vec<ReportRow>,
    /// Unweighted mean of the per-row success rates.
    pub mean_success_rate: f64,
    pub skipped: Vec<SkippedFile>,
}

fn load_summary(path: &Path) -> Result<RunSummary> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let summary: RunSummary =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    ensure!(
        summary.schema == SUMMARY_SCHEMA,
        "unsupported summary schema `{}`",
        summary.schema
    );
    ensure!(
        summary.episodes == summary.per_seed.len(),
        "episode count {} disagrees with {} per-seed entries",
        summary.episodes,
        summary.per_seed.len()
    );
    Ok(summary)
}

/// Collects rows from every readable summary; unreadable ones are skipped.
///
/// Fails when no file is given or none could be read.
pub fn build_report(paths: &[PathBuf]) -> Result<Report> {
    if paths.is_empty() {
        bail!("no summary files given");
    }
    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for path in paths {
        match load_summary(path) {
            Ok(s) => rows.push(ReportRow {
                task: s.task,
                source: path.display().to_string(),
                episodes: s.episodes,
                successes: s.successes,
                success_rate: s.success_rate,
                mean_steps: s.mean_steps,
            }),
            Err(e) => skipped.push(SkippedFile {
                source: path.display().to_string(),
                reason: format!("{e:#}"),
            }),
        }
    }
    if rows.is_empty() {
        bail!("all {} summary files were unreadable", skipped.len());
    }
    let mean_success_rate = rows.iter().map(|r| r.success_rate).sum::<f64>() / rows.len() as f64;
    Ok(Report {
        schema: REPORT_SCHEMA.to_string(),
        rows,
        mean_success_rate,
        skipped,
    })
}

pub fn render_table(report: &Report) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<22} {:>8} {:>9} {:>12} {:>10}",
        "task", "episodes", "successes", "success_rate", "mean_steps"
    );
    for r in &report.rows {
        let _ = writeln!(
            out,
            "{:<22} {:>8} {:>9} {:>12.3} {:>10.1}",
            r.task.as_str(),
            r.episodes,
            r.successes,
            r.success_rate,
            r.mean_steps
        );
    }
    let episodes: usize = report.rows.iter().map(|r| r.episodes).sum();
    let successes: usize = report.rows.iter().map(|r| r.successes).sum();
    let steps = report
        .rows
        .iter()
        .map(|r| r.mean_steps * r.episodes as f64)
        .sum::<f64>()
        / episodes.max(1) as f64;
    let _ = writeln!(
        out,
        "{:<22} {:>8} {:>9} {:>12.3} {:>10.1}",
        "mean", episodes, successes, report.mean_success_rate, steps
    );
    out
}

pub fn render(report: &Report, format: ReportFormat) -> String {
    match format {
        ReportFormat::Table => render_table(report),
        ReportFormat::Machine => {
            let mut s = serde_json::to_string_pretty(report).expect("reports serialize");
            s.push('\n');
            s
        }
    }
}
