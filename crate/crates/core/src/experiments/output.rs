use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::diagnostics::LyapunovReport;
use crate::error::Result;

use super::fit::RateFit;

/// Outcome of one verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Status {
    Pass,
    /// Passed because the measured quantity is identically zero.
    PassTrivial,
    Fail,
    /// Reported for information; does not affect the exit status.
    Diagnostic,
}

impl Status {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }

    pub fn is_failure(self) -> bool {
        self == Status::Fail
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    pub status: Status,
    pub detail: String,
}

impl Verdict {
    pub fn new(name: impl Into<String>, status: Status, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            status,
            detail: detail.into(),
        }
    }
}

/// Replica bookkeeping: `completed + excluded == requested`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ReplicaCount {
    pub requested: usize,
    pub completed: usize,
    /// Replicas dropped after a non-finite state.
    pub excluded: usize,
}

impl ReplicaCount {
    pub fn add(&mut self, other: ReplicaCount) {
        self.requested += other.requested;
        self.completed += other.completed;
        self.excluded += other.excluded;
    }

    /// More than 1% of the replicas were lost.
    pub fn blowup_dominated(&self) -> bool {
        self.excluded as f64 > 0.01 * self.requested as f64
    }
}

/// Contents of `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub experiment: String,
    pub config: serde_json::Value,
    pub constants: BTreeMap<String, f64>,
    pub fits: BTreeMap<String, RateFit>,
    pub verdicts: Vec<Verdict>,
    pub replicas: ReplicaCount,
    /// Experiment-specific results.
    pub results: serde_json::Value,
}

impl Summary {
    pub fn passed(&self) -> bool {
        !self.verdicts.iter().any(|v| v.status.is_failure())
    }

    pub fn verdict(&self, name: &str) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.name == name)
    }
}

/// Column-oriented numeric table written as `series.csv`; `None` cells are empty.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
}

impl Table {
    pub fn new(columns: Vec<String>) -> Self {
        Self { columns, rows: Vec::new() }
    }

    /// One row per report, columns from [`LyapunovReport::columns`].
    pub fn from_reports(reports: &[LyapunovReport]) -> Self {
        Self::from_tagged_reports(&[], reports.iter().map(|r| (Vec::new(), r)))
    }

    /// Reports with extra leading columns after `t` (e.g. the ensemble size).
    pub fn from_tagged_reports<'a>(
        tags: &[&str],
        reports: impl IntoIterator<Item = (Vec<f64>, &'a LyapunovReport)>,
    ) -> Self {
        let mut table = Table::default();
        for (values, report) in reports {
            let cols = report.columns();
            if table.columns.is_empty() {
                table.columns.push(cols[0].0.clone());
                table.columns.extend(tags.iter().map(|s| s.to_string()));
                table.columns.extend(cols[1..].iter().map(|(k, _)| k.clone()));
            }
            let mut row = vec![cols[0].1];
            row.extend(values.into_iter().map(Some));
            row.extend(cols[1..].iter().map(|(_, v)| *v));
            table.rows.push(row);
        }
        table
    }

    pub fn push(&mut self, row: Vec<Option<f64>>) {
        assert_eq!(row.len(), self.columns.len(), "row width differs from header");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|v| v.map(|x| format!("{x:e}")).unwrap_or_default()))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let mut r = csv::Reader::from_path(path)?;
        let columns = r.headers()?.iter().map(String::from).collect();
        let mut rows = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            rows.push(rec.iter().map(|s| s.trim().parse::<f64>().ok()).collect());
        }
        Ok(Self { columns, rows })
    }
}

/// What an experiment returns: the summary and the per-record series.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub summary: Summary,
    pub series: Table,
}

impl ExperimentOutput {
    /// Writes `series.csv` and `summary.json` into `dir`, creating it if needed.
    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        self.series.write_csv(&dir.join("series.csv"))?;
        let json = serde_json::to_string_pretty(&self.summary)?;
        fs::write(dir.join("summary.json"), json + "\n")?;
        Ok(())
    }
}
