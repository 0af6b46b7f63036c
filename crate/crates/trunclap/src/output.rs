//! CSV artifacts. Numbers use the shortest round-trip representation, so
//! identical runs give byte-identical files.

use std::path::Path;

use trunclap_core::solver::{Discretization, HistoryEntry};

pub type CsvError = csv::Error;

pub fn fmt_f64(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || !v.is_finite() || (1e-4..1e6).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

/// One row per interior node: coordinates then the value.
pub fn write_solution(path: &Path, disc: &Discretization, columns: &[(&str, &[f64])]) -> Result<(), CsvError> {
    let dim = disc.grid().dim();
    let mut w = csv::Writer::from_path(path)?;
    let mut header: Vec<&str> = ["x", "y", "z"][..dim].to_vec();
    header.extend(columns.iter().map(|c| c.0));
    w.write_record(&header)?;
    for i in 0..disc.len() {
        let x = disc.grid().position(i);
        let mut row: Vec<String> = x[..dim].iter().map(|&v| fmt_f64(v)).collect();
        row.extend(columns.iter().map(|c| fmt_f64(c.1[i])));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_history(path: &Path, history: &[HistoryEntry]) -> Result<(), CsvError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["iter", "residual", "sup"])?;
    for h in history {
        w.write_record([h.iter.to_string(), fmt_f64(h.residual), fmt_f64(h.sup)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_table(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> Result<(), CsvError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(r.iter().map(|&v| fmt_f64(v)))?;
    }
    w.flush()?;
    Ok(())
}
