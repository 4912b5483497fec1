//! Small CSV helpers shared by the exporters. Floats are written with Rust's
//! shortest round-trip formatting, so values survive a write/read cycle.

use nalgebra::DMatrix;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};

pub fn write_matrix<W: Write>(w: W, header: Option<&[String]>, m: &DMatrix<f64>) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    if let Some(h) = header {
        wtr.write_record(h)?;
    }
    for r in 0..m.nrows() {
        wtr.write_record((0..m.ncols()).map(|c| m[(r, c)].to_string()))?;
    }
    wtr.flush()?;
    Ok(())
}

/// Reads a numeric matrix. Lines starting with `#` are skipped; a first row
/// that does not parse as numbers is treated as a header.
pub fn read_matrix<R: BufRead>(r: R) -> Result<DMatrix<f64>> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (idx, line) in r.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let parsed: std::result::Result<Vec<f64>, _> = t.split(',').map(|v| v.trim().parse::<f64>()).collect();
        match parsed {
            Ok(v) => rows.push(v),
            Err(e) if rows.is_empty() && t.chars().any(|c| c.is_ascii_alphabetic()) => {
                let _ = e;
                continue;
            }
            Err(e) => return Err(Error::Parse { line: idx + 1, msg: e.to_string() }),
        }
    }
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::Schema("ragged matrix rows".into()));
    }
    Ok(DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j]))
}
