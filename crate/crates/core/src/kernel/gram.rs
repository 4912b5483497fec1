//! Gram assembly and the kernel-matrix container with CSV import/export.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use crate::error::{Error, Result};

/// Symmetric Gram matrix of `f` over `items`, evaluated on the upper
/// triangle in parallel.
pub fn gram<T, F>(items: &[T], f: F) -> Result<DMatrix<f64>>
where
    T: Sync,
    F: Fn(&T, &T) -> Result<f64> + Sync,
{
    let n = items.len();
    if n == 0 {
        return Err(Error::Argument("empty dataset".into()));
    }
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a..n).map(move |b| (a, b))).collect();
    let vals: Vec<f64> = pairs
        .par_iter()
        .map(|&(a, b)| f(&items[a], &items[b]).map_err(|e| Error::KernelEntry { row: a, col: b, source: Box::new(e) }))
        .collect::<Result<_>>()?;
    let mut k = DMatrix::zeros(n, n);
    for (&(a, b), &v) in pairs.iter().zip(&vals) {
        k[(a, b)] = v;
        k[(b, a)] = v;
    }
    Ok(k)
}

/// Rectangular block `f(rows[a], cols[b])`.
pub fn cross_gram<T, F>(rows: &[T], cols: &[T], f: F) -> Result<DMatrix<f64>>
where
    T: Sync,
    F: Fn(&T, &T) -> Result<f64> + Sync,
{
    let (nr, nc) = (rows.len(), cols.len());
    if nr == 0 || nc == 0 {
        return Err(Error::Argument("empty dataset".into()));
    }
    let vals: Vec<f64> = (0..nr * nc)
        .into_par_iter()
        .map(|idx| {
            let (a, b) = (idx / nc, idx % nc);
            f(&rows[a], &cols[b]).map_err(|e| Error::KernelEntry { row: a, col: b, source: Box::new(e) })
        })
        .collect::<Result<_>>()?;
    Ok(DMatrix::from_row_slice(nr, nc, &vals))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KernelKind {
    Sigma,
    Theta,
    SigmaQ,
    ThetaQ,
    Empirical,
}

impl fmt::Display for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl FromStr for KernelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "Sigma" => KernelKind::Sigma,
            "Theta" => KernelKind::Theta,
            "SigmaQ" => KernelKind::SigmaQ,
            "ThetaQ" => KernelKind::ThetaQ,
            "Empirical" => KernelKind::Empirical,
            other => return Err(Error::Schema(format!("unknown kernel kind '{other}'"))),
        })
    }
}

/// Descriptive metadata carried in the CSV header.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelMeta {
    pub layers: usize,
    pub xi: f64,
    pub activation: String,
    pub encoder_hash: Option<String>,
}

impl Default for KernelMeta {
    fn default() -> Self {
        Self { layers: 1, xi: 0.0, activation: "identity".into(), encoder_hash: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelMatrix {
    pub kind: KernelKind,
    pub entries: DMatrix<f64>,
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
    pub meta: KernelMeta,
}

impl KernelMatrix {
    /// Wraps a matrix; labels default to `0..N`.
    pub fn new(kind: KernelKind, entries: DMatrix<f64>, meta: KernelMeta) -> Self {
        let row_labels = (0..entries.nrows()).map(|i| i.to_string()).collect();
        let col_labels = (0..entries.ncols()).map(|i| i.to_string()).collect();
        Self { kind, entries, row_labels, col_labels, meta }
    }

    pub fn with_labels(mut self, rows: Vec<String>, cols: Vec<String>) -> Result<Self> {
        if rows.len() != self.entries.nrows() || cols.len() != self.entries.ncols() {
            return Err(Error::Shape("label count does not match matrix".into()));
        }
        self.row_labels = rows;
        self.col_labels = cols;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.entries.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn is_square(&self) -> bool {
        self.entries.is_square()
    }

    /// Largest `|K_ab − K_ba|`.
    pub fn asymmetry(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        (&self.entries - self.entries.transpose()).amax()
    }

    pub fn header_line(&self) -> String {
        format!(
            "# kind={} L={} xi={} activation={} encoder={}",
            self.kind,
            self.meta.layers,
            self.meta.xi,
            self.meta.activation,
            self.meta.encoder_hash.as_deref().unwrap_or("none")
        )
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{}", self.header_line())?;
        let mut cw = csv::Writer::from_writer(w);
        let mut head = vec!["id".to_string()];
        head.extend(self.col_labels.iter().cloned());
        cw.write_record(&head)?;
        for (a, label) in self.row_labels.iter().enumerate() {
            let mut rec = vec![label.clone()];
            rec.extend((0..self.entries.ncols()).map(|b| self.entries[(a, b)].to_string()));
            cw.write_record(&rec)?;
        }
        cw.flush()?;
        Ok(())
    }

    pub fn read_csv<R: BufRead>(mut r: R) -> Result<Self> {
        let mut first = String::new();
        r.read_line(&mut first)?;
        let meta_line = first.trim().strip_prefix('#').ok_or_else(|| Error::Schema("missing kernel header line".into()))?;
        let mut kind = None;
        let mut meta = KernelMeta::default();
        for field in meta_line.split_whitespace() {
            let (k, v) = field.split_once('=').ok_or_else(|| Error::Schema(format!("bad header field '{field}'")))?;
            match k {
                "kind" => kind = Some(v.parse::<KernelKind>()?),
                "L" => meta.layers = v.parse().map_err(|_| Error::Parse { line: 1, msg: format!("bad L '{v}'") })?,
                "xi" => meta.xi = v.parse().map_err(|_| Error::Parse { line: 1, msg: format!("bad xi '{v}'") })?,
                "activation" => meta.activation = v.to_string(),
                "encoder" => meta.encoder_hash = (v != "none").then(|| v.to_string()),
                _ => return Err(Error::Schema(format!("unknown header key '{k}'"))),
            }
        }
        let kind = kind.ok_or_else(|| Error::Schema("header lacks kind".into()))?;
        let mut cr = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
        let col_labels: Vec<String> = cr.headers()?.iter().skip(1).map(str::to_string).collect();
        let mut row_labels = Vec::new();
        let mut vals = Vec::new();
        for (i, rec) in cr.records().enumerate() {
            let rec = rec?;
            let line = i + 3;
            if rec.len() != col_labels.len() + 1 {
                return Err(Error::Schema(format!("line {line}: expected {} fields, got {}", col_labels.len() + 1, rec.len())));
            }
            row_labels.push(rec[0].to_string());
            for f in rec.iter().skip(1) {
                vals.push(f.trim().parse::<f64>().map_err(|_| Error::Parse { line, msg: format!("bad number '{f}'") })?);
            }
        }
        let entries = DMatrix::from_row_slice(row_labels.len(), col_labels.len(), &vals);
        Ok(Self { kind, entries, row_labels, col_labels, meta })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_and_duplicate_points() {
        let k = gram(&[2.0f64], |a, b| Ok(a * b)).unwrap();
        assert_eq!(k[(0, 0)], 4.0);
        let k = gram(&[1.5f64, 1.5], |a, b| Ok(a * b)).unwrap();
        let eig = k.symmetric_eigenvalues();
        assert!(eig.iter().any(|v| v.abs() < 1e-12));
    }

    #[test]
    fn entry_error_carries_index() {
        let err = gram(&[0.0f64, 1.0, 2.0], |a, b| if a + b > 2.5 { Err(Error::Domain("x".into())) } else { Ok(0.0) }).unwrap_err();
        assert!(matches!(err, Error::KernelEntry { row: 1, col: 2, .. }));
        assert!(gram::<f64, _>(&[], |_, _| Ok(0.0)).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let entries = DMatrix::from_row_slice(2, 3, &[1.0, 0.1 + 0.2, -3e-17, 4.0, 5.5, 1.0 / 3.0]);
        let meta = KernelMeta { layers: 2, xi: 0.25, activation: "relu".into(), encoder_hash: Some("0123abcd".into()) };
        let k = KernelMatrix::new(KernelKind::ThetaQ, entries, meta);
        let mut buf = Vec::new();
        k.write_csv(&mut buf).unwrap();
        let back = KernelMatrix::read_csv(&buf[..]).unwrap();
        assert_eq!(back, k);
    }
}
