//! Robustness report types and CSV/JSON emission.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Which split a report row was measured on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Validation,
    Test,
}

impl std::fmt::Display for Split {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Split::Validation => write!(f, "validation"),
            Split::Test => write!(f, "test"),
        }
    }
}

/// One (config, variant) accuracy measurement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub config: String,
    pub variant: String,
    pub split: Split,
    pub accuracy: f64,
}

/// Run provenance carried in the JSON form of the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub seed: u64,
    pub commit: String,
    pub config_hash: String,
    pub wall_time_secs: f64,
    /// Names of configs whose training diverged (no rows emitted for them).
    pub diverged: Vec<String>,
}

/// A full robustness run: one row per (config, variant) plus metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustnessReport {
    pub rows: Vec<ReportRow>,
    pub metadata: ReportMetadata,
}

impl RobustnessReport {
    /// Accuracy of a (config, variant, split) row, if present.
    pub fn accuracy(&self, config: &str, variant: &str, split: Split) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.config == config && r.variant == variant && r.split == split)
            .map(|r| r.accuracy)
    }

    /// CSV form: fixed header, one row per measurement, accuracies with four
    /// decimal places, newline-terminated. Metadata is JSON-only so repeated
    /// runs with equal seeds are byte-identical.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("config,variant,split,accuracy\n");
        for row in &self.rows {
            out.push_str(&format!(
                "{},{},{},{:.4}\n",
                row.config, row.variant, row.split, row.accuracy
            ));
        }
        out
    }
}

/// Output format of [`emit_report`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Csv,
    Json,
}

/// Write a report to disk as UTF-8, newline-terminated.
pub fn emit_report(report: &RobustnessReport, format: ReportFormat, path: &Path) -> Result<()> {
    let mut file = std::fs::File::create(path)?;
    match format {
        ReportFormat::Csv => file.write_all(report.to_csv().as_bytes())?,
        ReportFormat::Json => {
            serde_json::to_writer_pretty(&mut file, report)?;
            file.write_all(b"\n")?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_row_report() -> RobustnessReport {
        RobustnessReport {
            rows: vec![ReportRow {
                config: "eball-cubic".into(),
                variant: "72x72".into(),
                split: Split::Test,
                accuracy: 0.93234,
            }],
            metadata: ReportMetadata {
                seed: 5,
                commit: "unknown".into(),
                config_hash: "abcd".into(),
                wall_time_secs: 1.5,
                diverged: vec![],
            },
        }
    }

    #[test]
    fn csv_has_header_plus_rows_and_4_decimals() {
        let csv = one_row_report().to_csv();
        assert_eq!(csv, "config,variant,split,accuracy\neball-cubic,72x72,test,0.9323\n");
        assert_eq!(csv.lines().count(), 2);
        assert!(csv.ends_with('\n'));
    }

    #[test]
    fn json_round_trips_to_equal_report() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("report.json");
        let report = one_row_report();
        emit_report(&report, ReportFormat::Json, &path).unwrap();
        let back: RobustnessReport =
            serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
        assert_eq!(report, back);
    }

    #[test]
    fn accuracy_lookup() {
        let report = one_row_report();
        assert_eq!(report.accuracy("eball-cubic", "72x72", Split::Test), Some(0.93234));
        assert_eq!(report.accuracy("eball-cubic", "72x72", Split::Validation), None);
    }
}
