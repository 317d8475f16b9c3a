//! File formats: CSV ingestion and machine-readable outputs.
//!
//! Floats in generated JSON and CSV are printed with 17 significant digits
//! so outputs round-trip exactly and identical runs produce byte-identical
//! files.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use serde_json::Value;

use crate::embeddings::SampleSet;
use crate::error::{Error, Result};
use crate::oracle1d::{BoundsCheck, GridDensity};
use crate::WitnessSolution;

/// 17 significant digits: enough to reconstruct any f64 exactly.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// A JSON number carrying the fixed 17-digit rendering.
pub fn json_number(x: f64) -> Value {
    Value::Number(serde_json::Number::from_string_unchecked(fmt_float(x)))
}

pub fn witness_to_json(w: &WitnessSolution) -> Value {
    serde_json::json!({
        "lambda": json_number(w.lambda),
        "value": json_number(w.value),
        "kinetic": json_number(w.kinetic),
        "penalty": json_number(w.penalty),
        "m": w.coeffs.len(),
        "coeffs": w.coeffs.iter().map(|&c| json_number(c)).collect::<Vec<_>>(),
    })
}

pub fn bounds_check_to_json(bc: &BoundsCheck, a: f64, b: f64) -> Value {
    serde_json::json!({
        "s": json_number(bc.s),
        "w2": json_number(bc.w2),
        "lower_ok": bc.lower_ok,
        "upper_ok": bc.upper_ok,
        "a": json_number(a),
        "b": json_number(b),
    })
}

pub fn write_json(path: &Path, value: &Value) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut out, value)?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(())
}

fn parse_numeric_record(record: &csv::StringRecord) -> Option<Vec<f64>> {
    let mut row = Vec::with_capacity(record.len());
    for field in record.iter() {
        row.push(field.trim().parse::<f64>().ok()?);
    }
    Some(row)
}

fn read_numeric_csv<R: Read>(reader: R, expected_arity: Option<usize>) -> Result<Vec<Vec<f64>>> {
    let mut csv_reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut arity = expected_arity;
    for (index, record) in csv_reader.records().enumerate() {
        let record = record.map_err(|e| Error::Parse {
            line: index + 1,
            message: e.to_string(),
        })?;
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        let line = record
            .position()
            .map(|p| p.line() as usize)
            .unwrap_or(index + 1);
        match parse_numeric_record(&record) {
            Some(row) => {
                let want = *arity.get_or_insert(row.len());
                if row.len() != want {
                    return Err(Error::Parse {
                        line,
                        message: format!("expected {want} columns, found {}", row.len()),
                    });
                }
                rows.push(row);
            }
            None if index == 0 => {
                // A single leading non-numeric row is treated as a header.
                if let Some(want) = expected_arity {
                    if record.len() != want {
                        return Err(Error::Parse {
                            line,
                            message: format!("expected {want} columns, found {}", record.len()),
                        });
                    }
                }
            }
            None => {
                return Err(Error::Parse {
                    line,
                    message: "row contains a non-numeric field".into(),
                });
            }
        }
    }
    Ok(rows)
}

/// Reads a sample set: one point per row, `d` numeric columns, optional
/// single header row.
pub fn read_samples_csv(path: &Path, label: &str) -> Result<SampleSet> {
    let rows = read_numeric_csv(File::open(path)?, None)?;
    if rows.is_empty() {
        return Err(Error::InvalidParameter(format!(
            "{}: no sample rows found",
            path.display()
        )));
    }
    SampleSet::from_rows(&rows, label)
}

/// Reads a tabulated density pair from `(x, p, q)` columns. Bounds are
/// either supplied or taken from the tabulated extremes, in both cases
/// passing through the validated constructor.
pub fn read_grid_density_csv(path: &Path, bounds: Option<(f64, f64)>) -> Result<GridDensity> {
    let rows = read_numeric_csv(File::open(path)?, Some(3))?;
    if rows.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "{}: need at least 2 grid rows, found {}",
            path.display(),
            rows.len()
        )));
    }
    let grid: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    let p: Vec<f64> = rows.iter().map(|r| r[1]).collect();
    let q: Vec<f64> = rows.iter().map(|r| r[2]).collect();
    match bounds {
        Some((a, b)) => GridDensity::new(grid, p, q, a, b),
        None => GridDensity::with_auto_bounds(grid, p, q),
    }
}

/// Writes the tabulated witness and velocity: point coordinates, u(x), then
/// the gradient coordinates.
pub fn write_witness_grid_csv(
    path: &Path,
    dim: usize,
    rows: &[(Vec<f64>, f64, Vec<f64>)],
) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    match dim {
        1 => writeln!(out, "x,u,grad_x")?,
        2 => writeln!(out, "x1,x2,u,grad_x1,grad_x2")?,
        other => return Err(Error::UnsupportedDimension(other)),
    }
    for (point, u, grad) in rows {
        let mut fields: Vec<String> = point.iter().map(|&v| fmt_float(v)).collect();
        fields.push(fmt_float(*u));
        fields.extend(grad.iter().map(|&v| fmt_float(v)));
        writeln!(out, "{}", fields.join(","))?;
    }
    out.flush()?;
    Ok(())
}

/// One row per retained mode and λ, plus a reconstruction check row per λ
/// comparing the spectral re-assembly of the witness with the direct solve.
pub struct DirectionsRow {
    pub lambda: f64,
    pub mode: usize,
    pub eigenvalue: f64,
    pub raw_alignment: f64,
    pub filtered_coefficient: f64,
}

pub fn write_directions_csv(
    path: &Path,
    rows: &[DirectionsRow],
    reconstruction_errors: &[(f64, f64)],
) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "lambda,j,eigenvalue,raw_alignment,filtered_coefficient")?;
    let mut last_lambda: Option<f64> = None;
    let mut check = reconstruction_errors.iter();
    for row in rows {
        if let Some(prev) = last_lambda {
            if prev != row.lambda {
                if let Some((lambda, err)) = check.next() {
                    writeln!(out, "{},reconstruction_check,,,{}", fmt_float(*lambda), fmt_float(*err))?;
                }
            }
        }
        last_lambda = Some(row.lambda);
        writeln!(
            out,
            "{},{},{},{},{}",
            fmt_float(row.lambda),
            row.mode,
            fmt_float(row.eigenvalue),
            fmt_float(row.raw_alignment),
            fmt_float(row.filtered_coefficient),
        )?;
    }
    if let Some((lambda, err)) = check.next() {
        writeln!(out, "{},reconstruction_check,,,{}", fmt_float(*lambda), fmt_float(*err))?;
    }
    out.flush()?;
    Ok(())
}
