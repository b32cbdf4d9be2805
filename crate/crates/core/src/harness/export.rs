use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use super::{AlphaHistogram, ExperimentReport};
use crate::{Error, Result};

pub const METRICS_FILE: &str = "metrics.csv";
pub const ALPHAS_FILE: &str = "alphas.csv";
pub const REPORT_FILE: &str = "report.json";
pub const HISTOGRAM_FILE: &str = "alpha_hist.csv";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExportFormat {
    #[default]
    Csv,
    Json,
}

impl fmt::Display for ExportFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExportFormat::Csv => "csv",
            ExportFormat::Json => "json",
        })
    }
}

impl FromStr for ExportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(ExportFormat::Csv),
            "json" => Ok(ExportFormat::Json),
            other => Err(Error::InvalidArgument(format!(
                "unknown export format `{other}` (expected csv or json)"
            ))),
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_err(path: &Path) -> impl Fn(::csv::Error) -> Error + '_ {
    move |e| Error::Csv {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

/// Writes `reports` under `dir` and returns the files written.
///
/// CSV produces `metrics.csv` (one row per successful split) and
/// `alphas.csv` (one row per learned α); JSON produces `report.json` with
/// the full reports. Output bytes depend only on the reports.
pub fn export_reports(
    reports: &[ExperimentReport],
    dir: impl AsRef<Path>,
    format: ExportFormat,
) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    match format {
        ExportFormat::Csv => Ok(vec![
            write_metrics(reports, dir)?,
            write_alphas(reports, dir)?,
        ]),
        ExportFormat::Json => {
            let path = dir.join(REPORT_FILE);
            let mut text = serde_json::to_string_pretty(reports)?;
            text.push('\n');
            fs::write(&path, text).map_err(io_err(&path))?;
            Ok(vec![path])
        }
    }
}

fn write_metrics(reports: &[ExperimentReport], dir: &Path) -> Result<PathBuf> {
    let path = dir.join(METRICS_FILE);
    let mut w = ::csv::Writer::from_path(&path).map_err(csv_err(&path))?;
    w.write_record([
        "activation",
        "mode",
        "split",
        "accuracy",
        "coverage",
        "avg_set_size",
        "final_train_loss",
    ])
    .map_err(csv_err(&path))?;
    for r in reports {
        for s in &r.splits {
            w.write_record([
                r.config.activation.to_string(),
                r.config.mode.to_string(),
                s.split_index.to_string(),
                s.accuracy.to_string(),
                s.coverage.to_string(),
                s.avg_set_size.to_string(),
                s.final_train_loss.to_string(),
            ])
            .map_err(csv_err(&path))?;
        }
    }
    w.flush().map_err(io_err(&path))?;
    Ok(path)
}

fn write_alphas(reports: &[ExperimentReport], dir: &Path) -> Result<PathBuf> {
    let path = dir.join(ALPHAS_FILE);
    let mut w = ::csv::Writer::from_path(&path).map_err(csv_err(&path))?;
    w.write_record(["activation", "mode", "split", "unit", "alpha"])
        .map_err(csv_err(&path))?;
    for r in reports {
        for s in &r.splits {
            for (unit, alpha) in s.learned_alphas.iter().enumerate() {
                w.write_record([
                    r.config.activation.to_string(),
                    r.config.mode.to_string(),
                    s.split_index.to_string(),
                    unit.to_string(),
                    alpha.to_string(),
                ])
                .map_err(csv_err(&path))?;
            }
        }
    }
    w.flush().map_err(io_err(&path))?;
    Ok(path)
}

/// Writes `alpha_hist.csv` with columns `bin_lo,bin_hi,count`.
pub fn export_histogram(hist: &AlphaHistogram, dir: impl AsRef<Path>) -> Result<PathBuf> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let path = dir.join(HISTOGRAM_FILE);
    let mut w = ::csv::Writer::from_path(&path).map_err(csv_err(&path))?;
    w.write_record(["bin_lo", "bin_hi", "count"])
        .map_err(csv_err(&path))?;
    for (i, count) in hist.counts.iter().enumerate() {
        w.write_record([
            hist.edges[i].to_string(),
            hist.edges[i + 1].to_string(),
            count.to_string(),
        ])
        .map_err(csv_err(&path))?;
    }
    w.flush().map_err(io_err(&path))?;
    Ok(path)
}
