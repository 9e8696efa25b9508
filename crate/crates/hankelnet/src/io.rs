//! Point dumps and experiment records on disk.

use std::io::{Read, Write};

use hankelnet_core::{ExperimentRecord, PointSet, PrimeBase};
use thiserror::Error;

pub const RECORD_HEADER: [&str; 12] =
    ["design", "b", "m", "s", "integrand", "c", "weight_mode", "r", "batch", "estimate", "sq_error", "seed"];

#[derive(Debug, Error)]
pub enum IoError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("point file: {0}")]
    Format(String),
}

/// A real number with 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_real(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

fn parse_real(field: &str) -> Result<f64, IoError> {
    field.trim().parse().map_err(|_| IoError::Format(format!("bad number {field:?}")))
}

/// Writes `n,x1,...,xs` with one row per point in stored order.
pub fn write_points_csv<W: Write>(out: W, points: &PointSet) -> Result<(), IoError> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["n".to_string()];
    header.extend((1..=points.dim()).map(|j| format!("x{j}")));
    w.write_record(&header)?;
    let mut row = Vec::with_capacity(points.dim() + 1);
    for (i, x) in points.iter().enumerate() {
        row.clear();
        row.push(i.to_string());
        row.extend(x.iter().map(|&v| fmt_real(v)));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a point dump written by [`write_points_csv`].
pub fn read_points_csv<R: Read>(input: R, base: PrimeBase) -> Result<PointSet, IoError> {
    let mut r = csv::Reader::from_reader(input);
    let s = r.headers()?.len().checked_sub(1).ok_or_else(|| IoError::Format("empty header".into()))?;
    let mut coords = Vec::new();
    let mut n = 0;
    for rec in r.records() {
        let rec = rec?;
        if rec.len() != s + 1 {
            return Err(IoError::Format(format!("row {n} has {} fields, expected {}", rec.len(), s + 1)));
        }
        for field in rec.iter().skip(1) {
            coords.push(parse_real(field)?);
        }
        n += 1;
    }
    Ok(PointSet::from_coords(base, n, s, coords))
}

fn record_fields(rec: &ExperimentRecord) -> [String; 12] {
    [
        rec.design.name().to_string(),
        rec.b.to_string(),
        rec.m.to_string(),
        rec.s.to_string(),
        rec.integrand.to_string(),
        rec.c.map(fmt_real).unwrap_or_default(),
        rec.weight_mode.map(|w| w.name().to_string()).unwrap_or_default(),
        rec.r.to_string(),
        rec.batch.to_string(),
        fmt_real(rec.estimate),
        fmt_real(rec.sq_error),
        rec.seed.to_string(),
    ]
}

pub fn write_records_csv<W: Write>(out: W, records: &[ExperimentRecord]) -> Result<(), IoError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RECORD_HEADER)?;
    for rec in records {
        w.write_record(record_fields(rec))?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct RecordJson {
    pub design: &'static str,
    pub b: u8,
    pub m: usize,
    pub s: usize,
    pub integrand: &'static str,
    pub c: Option<f64>,
    pub weight_mode: Option<&'static str>,
    pub r: usize,
    pub batch: usize,
    pub estimate: f64,
    pub sq_error: f64,
    pub seed: u64,
}

impl From<&ExperimentRecord> for RecordJson {
    fn from(rec: &ExperimentRecord) -> Self {
        RecordJson {
            design: rec.design.name(),
            b: rec.b,
            m: rec.m,
            s: rec.s,
            integrand: rec.integrand,
            c: rec.c,
            weight_mode: rec.weight_mode.map(|w| w.name()),
            r: rec.r,
            batch: rec.batch,
            estimate: rec.estimate,
            sq_error: rec.sq_error,
            seed: rec.seed,
        }
    }
}

pub fn write_records_json<W: Write>(mut out: W, records: &[ExperimentRecord]) -> Result<(), IoError> {
    let rows: Vec<RecordJson> = records.iter().map(RecordJson::from).collect();
    serde_json::to_writer_pretty(&mut out, &rows).map_err(std::io::Error::from)?;
    writeln!(out)?;
    Ok(())
}
