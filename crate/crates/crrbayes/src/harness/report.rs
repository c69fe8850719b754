//! Report emission: per-method time-series CSVs, an over-dates summary
//! table, and a structured JSON run summary.
//!
//! All numeric cells use Rust's shortest-round-trip float formatting, so
//! re-parsing an emitted file reproduces the in-memory values exactly and
//! identical reports always serialize to identical bytes.

use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::Result;
use crate::harness::{GapEntry, RollingReport, TableRow};
use crate::propagate::MethodTag;

/// Column header of the per-method time-series files.
pub const TIMESERIES_HEADER: &str =
    "date,mean,median,p0.5,p99.5,width,market,premium_mean,premium_p99.5";

/// Column header of the summary table.
pub const SUMMARY_HEADER: &str = "method,mean,median,width";

/// Emission settings.
#[derive(Debug, Clone, Copy, Default)]
pub struct EmitOptions {
    /// Also write one price-sample file per (date, method) where the
    /// report retained samples.
    pub write_samples: bool,
}

#[derive(Serialize)]
struct RunSummaryFile<'a> {
    methods: &'a [MethodTag],
    dates_evaluated: usize,
    first_date: Option<chrono::NaiveDate>,
    last_date: Option<chrono::NaiveDate>,
    gaps: &'a [GapEntry],
    table: &'a [TableRow],
}

fn optional_cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Writes the report into `directory` (created if absent) and returns the
/// paths written, in emission order:
///
/// 1. `{method}_timeseries.csv` per configured method,
/// 2. `summary.csv` (header-only when the method set is empty),
/// 3. `run_summary.json`,
/// 4. optionally `{method}_samples_{date}.csv` for retained samples.
pub fn emit_report<P: AsRef<Path>>(
    report: &RollingReport,
    directory: P,
    opts: &EmitOptions,
) -> Result<Vec<PathBuf>> {
    let dir = directory.as_ref();
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();

    for &method in &report.methods {
        let path = dir.join(format!("{method}_timeseries.csv"));
        let mut out = File::create(&path)?;
        writeln!(out, "{TIMESERIES_HEADER}")?;
        for entry in &report.entries {
            let Some(result) = entry.results.iter().find(|r| r.method == method) else {
                continue;
            };
            let s = &result.summary;
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                entry.date,
                s.mean,
                s.median,
                s.ci_lower,
                s.ci_upper,
                s.width,
                optional_cell(entry.market),
                optional_cell(entry.market.map(|m| m - s.mean)),
                optional_cell(entry.market.map(|m| m - s.ci_upper)),
            )?;
        }
        written.push(path);
    }

    let summary_path = dir.join("summary.csv");
    let mut out = File::create(&summary_path)?;
    writeln!(out, "{SUMMARY_HEADER}")?;
    for row in report.table_summary() {
        writeln!(out, "{},{},{},{}", row.method, row.mean, row.median, row.width)?;
    }
    written.push(summary_path);

    let json_path = dir.join("run_summary.json");
    let table = report.table_summary();
    let summary = RunSummaryFile {
        methods: &report.methods,
        dates_evaluated: report.entries.len(),
        first_date: report.entries.first().map(|e| e.date),
        last_date: report.entries.last().map(|e| e.date),
        gaps: &report.gaps,
        table: &table,
    };
    let mut out = File::create(&json_path)?;
    out.write_all(serde_json::to_string_pretty(&summary)?.as_bytes())?;
    out.write_all(b"\n")?;
    written.push(json_path);

    if opts.write_samples {
        for entry in &report.entries {
            for result in &entry.results {
                let Some(samples) = &result.samples else {
                    continue;
                };
                let path = dir.join(format!("{}_samples_{}.csv", result.method, entry.date));
                let mut out = File::create(&path)?;
                writeln!(out, "price")?;
                for s in samples {
                    writeln!(out, "{s}")?;
                }
                written.push(path);
            }
        }
    }
    Ok(written)
}
