//! Convergence sweeps over `(design, base, m)` cells.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use hankelnet_core::estimators::log2_slope;
use hankelnet_core::{default_precision, mse_experiment, EstimatorConfig, ExperimentRecord, RngSeed};
use thiserror::Error;

use crate::config::{ConfigError, IntegrandKind, SweepConfig};
use crate::io::{fmt_real, write_records_csv, IoError};

#[derive(Debug, Error)]
pub enum SweepError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Core(#[from] hankelnet_core::Error),
    #[error("cannot write {path}: {source}")]
    Output { path: PathBuf, source: IoError },
}

/// Median squared error of one cell, with the log2 slope of its `(design, b)` series.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub design: &'static str,
    pub b: u8,
    pub m: usize,
    pub median_sq_error: f64,
    pub mean_sq_error: f64,
    pub q1: f64,
    pub q3: f64,
    pub log2_slope: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub records: Vec<ExperimentRecord>,
    pub summary: Vec<SummaryRow>,
}

/// Seed of cell `(design, b, m)`, independent of which other cells are in the sweep.
fn cell_seed(master: u64, design: &str, b: u8, m: usize) -> RngSeed {
    RngSeed::new(master).derive(design, 0).derive("base", b as u64).derive("m", m as u64)
}

pub fn run_sweep(config: &SweepConfig) -> Result<SweepResult, SweepError> {
    config.validate()?;
    let mut records = Vec::new();
    let mut summary = Vec::new();
    for &design in &config.designs {
        for &base in &config.bases {
            let f = config.integrand.build(config.s, config.c, config.weight_mode, base)?;
            let weight_mode = (config.integrand == IntegrandKind::ProductPower).then_some(config.weight_mode);
            let first = summary.len();
            for m in config.ms() {
                let est = EstimatorConfig {
                    design,
                    base,
                    precision: default_precision(base),
                    m,
                    s: config.s,
                    r_mode: config.r_mode,
                    shift: true,
                    seed: cell_seed(config.seed, design.name(), base.get(), m),
                };
                let cell = mse_experiment(&f, weight_mode, &est, config.batches)?;
                summary.push(SummaryRow {
                    design: design.name(),
                    b: base.get(),
                    m,
                    median_sq_error: cell.median,
                    mean_sq_error: cell.mean,
                    q1: cell.q1,
                    q3: cell.q3,
                    log2_slope: None,
                });
                records.extend(cell.records);
            }
            let series: Vec<(f64, f64)> =
                summary[first..].iter().map(|row| (row.m as f64, row.median_sq_error)).collect();
            if series.len() > 1 {
                let slope = log2_slope(&series);
                summary[first..].iter_mut().for_each(|row| row.log2_slope = Some(slope));
            }
        }
    }
    records.sort_by(|a, c| (a.design.name(), a.b, a.m, a.batch).cmp(&(c.design.name(), c.b, c.m, c.batch)));
    summary.sort_by(|a, c| (a.design, a.b, a.m).cmp(&(c.design, c.b, c.m)));
    Ok(SweepResult { records, summary })
}

pub const SUMMARY_HEADER: [&str; 8] =
    ["design", "b", "m", "median_sq_error", "mean_sq_error", "q1", "q3", "log2_slope"];

pub fn write_summary_csv<W: Write>(out: W, rows: &[SummaryRow]) -> Result<(), IoError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SUMMARY_HEADER)?;
    for row in rows {
        w.write_record([
            row.design.to_string(),
            row.b.to_string(),
            row.m.to_string(),
            fmt_real(row.median_sq_error),
            fmt_real(row.mean_sq_error),
            fmt_real(row.q1),
            fmt_real(row.q3),
            row.log2_slope.map(fmt_real).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `sweep.csv` -> `sweep.summary.csv`.
pub fn summary_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    out.with_file_name(format!("{stem}.summary.csv"))
}

fn write_file(path: &Path, write: impl FnOnce(BufWriter<File>) -> Result<(), IoError>) -> Result<(), SweepError> {
    let wrap = |source: IoError| SweepError::Output { path: path.to_path_buf(), source };
    let file = File::create(path).map_err(|e| wrap(e.into()))?;
    write(BufWriter::new(file)).map_err(wrap)
}

/// Writes the records to `out` and the summary next to it.
pub fn write_sweep(result: &SweepResult, out: &Path) -> Result<PathBuf, SweepError> {
    write_file(out, |w| write_records_csv(w, &result.records))?;
    let summary = summary_path(out);
    write_file(&summary, |w| write_summary_csv(w, &result.summary))?;
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn summary_path_replaces_extension() {
        assert_eq!(summary_path(Path::new("out/sweep.csv")), PathBuf::from("out/sweep.summary.csv"));
        assert_eq!(summary_path(Path::new("run")), PathBuf::from("run.summary.csv"));
    }

    #[test]
    fn cell_seeds_differ_across_cells() {
        let a = cell_seed(1, "hrd", 2, 6);
        assert_ne!(a, cell_seed(1, "urd", 2, 6));
        assert_ne!(a, cell_seed(1, "hrd", 3, 6));
        assert_ne!(a, cell_seed(1, "hrd", 2, 7));
        assert_eq!(a, cell_seed(1, "hrd", 2, 6));
    }
}
