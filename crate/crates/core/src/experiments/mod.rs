//! Batch driver: declarative sweep configs, reports and CSV tables.
//!
//! Reports keep wall-clock data under a separate `timing` key so two runs
//! of one config can be compared by dropping that key. The CSV leaves
//! `runtime_ms` empty unless the config sets `record_timing`.

mod config;

pub use config::{
    validate_config, ConfigIssue, Coordinate, FamilyConfig, MemberConfig, OutputConfig,
    SweepConfig, ValidationReport,
};

use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::{run_member, ConstantEstimate, ConstantsError};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, thiserror::Error)]
pub enum SweepError {
    #[error("invalid config:\n{}", format_issues(.0))]
    Invalid(Vec<ConfigIssue>),
    #[error("member {member_id}: {source}")]
    Member {
        member_id: usize,
        source: ConstantsError,
    },
    #[error("cannot write {path}: {source}")]
    Output {
        path: String,
        source: std::io::Error,
    },
    #[error("cannot write CSV: {0}")]
    Csv(#[from] csv::Error),
}

fn format_issues(issues: &[ConfigIssue]) -> String {
    issues
        .iter()
        .map(|i| format!("  {i}"))
        .collect::<Vec<_>>()
        .join("\n")
}

/// One sweep member's estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub member_id: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<String>,
    pub norm: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<u32>,
    pub estimate: ConstantEstimate,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Timing {
    pub total_ms: f64,
    /// Wall-clock per row, in row order.
    pub rows_ms: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub tool: String,
    pub tool_version: String,
    pub config: SweepConfig,
    pub rows: Vec<ReportRow>,
    pub timing: Timing,
}

#[derive(Debug, Serialize)]
struct CsvRow<'a> {
    member_id: usize,
    group: &'a str,
    norm: &'a str,
    constant_name: &'static str,
    lower: f64,
    upper: f64,
    method: &'static str,
    seed: u64,
    samples: u64,
    runtime_ms: Option<f64>,
}

impl Report {
    /// The report as CSV, one row per member.
    pub fn to_csv(&self) -> Result<String, SweepError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for (row, ms) in self.rows.iter().zip(&self.timing.rows_ms) {
            let e = &row.estimate;
            w.serialize(CsvRow {
                member_id: row.member_id,
                group: row.group.as_deref().unwrap_or(""),
                norm: &row.norm,
                constant_name: e.constant.as_str(),
                lower: e.lower,
                upper: e.upper,
                method: e.method.as_str(),
                seed: e.seed,
                samples: e.samples,
                runtime_ms: self.config.record_timing.then_some(*ms),
            })?;
        }
        if self.rows.is_empty() {
            w.write_record([
                "member_id",
                "group",
                "norm",
                "constant_name",
                "lower",
                "upper",
                "method",
                "seed",
                "samples",
                "runtime_ms",
            ])?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| csv::Error::from(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("CSV is UTF-8"))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Writes the JSON and CSV files named in the config's `output` table.
    pub fn write_outputs(&self) -> Result<(), SweepError> {
        let write = |path: &Path, text: String| {
            std::fs::write(path, text).map_err(|source| SweepError::Output {
                path: path.display().to_string(),
                source,
            })
        };
        if let Some(path) = &self.config.output.json {
            write(path, self.to_json())?;
        }
        if let Some(path) = &self.config.output.csv {
            write(path, self.to_csv()?)?;
        }
        Ok(())
    }
}

/// Validates `config` and runs its experiment on every member. Members run
/// in parallel; rows come back in member order.
pub fn run_sweep(config: &SweepConfig) -> Result<Report, SweepError> {
    let issues = config.issues();
    if !issues.is_empty() {
        return Err(SweepError::Invalid(issues));
    }
    let members = config.members().map_err(|e| SweepError::Invalid(vec![e]))?;
    let options = config.options();
    let start = Instant::now();
    let results: Vec<(Result<ConstantEstimate, ConstantsError>, f64)> = members
        .par_iter()
        .map(|m| {
            let t = Instant::now();
            let r = run_member(config.experiment, m, &options);
            (r, t.elapsed().as_secs_f64() * 1e3)
        })
        .collect();
    let total_ms = start.elapsed().as_secs_f64() * 1e3;
    let mut rows = Vec::with_capacity(members.len());
    let mut rows_ms = Vec::with_capacity(members.len());
    for (member_id, (m, (result, ms))) in members.iter().zip(results).enumerate() {
        let estimate = result.map_err(|source| SweepError::Member { member_id, source })?;
        rows.push(ReportRow {
            member_id,
            group: m.group.as_ref().map(ToString::to_string),
            norm: m.norm.to_string(),
            degree: m.degree,
            depth: m.depth,
            estimate,
        });
        rows_ms.push(ms);
    }
    Ok(Report {
        tool: "fourier-lab".into(),
        tool_version: TOOL_VERSION.into(),
        config: config.clone(),
        rows,
        timing: Timing { total_ms, rows_ms },
    })
}
