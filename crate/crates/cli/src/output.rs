//! Table writers. Floats are written with 17 significant digits so values
//! survive a text round trip bit-for-bit.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::OutputFormat;
use crate::CliError;

/// `v` in scientific notation with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// A named table: CSV header plus rows of already formatted cells, with the
/// typed records used for JSON output.
pub struct Table<R> {
    pub stem: &'static str,
    pub header: &'static [&'static str],
    pub records: Vec<R>,
    pub cells: fn(&R) -> Vec<String>,
}

impl<R: Serialize> Table<R> {
    pub fn write(&self, dir: &Path, format: OutputFormat) -> Result<PathBuf, CliError> {
        match format {
            OutputFormat::Csv => {
                let path = dir.join(format!("{}.csv", self.stem));
                let mut w = csv::Writer::from_path(&path).map_err(|e| csv_error(&path, e))?;
                w.write_record(self.header)
                    .map_err(|e| csv_error(&path, e))?;
                for r in &self.records {
                    w.write_record((self.cells)(r))
                        .map_err(|e| csv_error(&path, e))?;
                }
                w.flush().map_err(|source| CliError::Io {
                    path: path.clone(),
                    source,
                })?;
                Ok(path)
            }
            OutputFormat::Json => {
                let path = dir.join(format!("{}.json", self.stem));
                write_json(&path, &self.records)?;
                Ok(path)
            }
        }
    }
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    CliError::Io {
        path: path.to_path_buf(),
        source: std::io::Error::other(e),
    }
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text =
        serde_json::to_string_pretty(value).map_err(|e| CliError::Serialize(e.to_string()))?;
    text.push('\n');
    fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub noise_dbm: f64,
    pub pa_count: usize,
    pub trials: usize,
    pub mean_error_m: f64,
    pub variance_m2: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MonteCarloRow {
    pub trial: u64,
    pub error_m: f64,
    pub x_hat: f64,
    pub y_hat: f64,
    pub clamped: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct HeatmapRow {
    pub x_m: f64,
    pub y_m: f64,
    pub mean_error_m: f64,
    pub normalized_error: f64,
}

pub fn sweep_table(records: Vec<SweepRow>) -> Table<SweepRow> {
    Table {
        stem: "sweep",
        header: &[
            "noise_dbm",
            "pa_count",
            "trials",
            "mean_error_m",
            "variance_m2",
        ],
        records,
        cells: |r| {
            vec![
                fmt_f64(r.noise_dbm),
                r.pa_count.to_string(),
                r.trials.to_string(),
                fmt_f64(r.mean_error_m),
                fmt_f64(r.variance_m2),
            ]
        },
    }
}

pub fn montecarlo_table(records: Vec<MonteCarloRow>) -> Table<MonteCarloRow> {
    Table {
        stem: "montecarlo",
        header: &["trial", "error_m", "x_hat", "y_hat", "clamped"],
        records,
        cells: |r| {
            vec![
                r.trial.to_string(),
                fmt_f64(r.error_m),
                fmt_f64(r.x_hat),
                fmt_f64(r.y_hat),
                r.clamped.to_string(),
            ]
        },
    }
}

pub fn heatmap_table(records: Vec<HeatmapRow>) -> Table<HeatmapRow> {
    Table {
        stem: "heatmap",
        header: &["x_m", "y_m", "mean_error_m", "normalized_error"],
        records,
        cells: |r| {
            vec![
                fmt_f64(r.x_m),
                fmt_f64(r.y_m),
                fmt_f64(r.mean_error_m),
                fmt_f64(r.normalized_error),
            ]
        },
    }
}
