use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use std::io::{BufRead, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    All,
    Train,
    Test,
}

/// Where a dataset came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub generator: String,
    pub seed: u64,
    pub params: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub inputs: Vec<Vec<f64>>,
    pub labels: Vec<f64>,
    pub split: Split,
    pub provenance: Provenance,
}

impl Dataset {
    pub fn new(inputs: Vec<Vec<f64>>, labels: Vec<f64>, provenance: Provenance) -> Result<Self> {
        let d = Self { inputs, labels, split: Split::All, provenance };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if self.inputs.len() != self.labels.len() {
            return Err(Error::Shape(format!("{} inputs but {} labels", self.inputs.len(), self.labels.len())));
        }
        if let Some(first) = self.inputs.first() {
            if self.inputs.iter().any(|x| x.len() != first.len()) {
                return Err(Error::Shape("inputs have differing dimensions".into()));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.inputs.first().map_or(0, Vec::len)
    }

    /// Inputs as an `N_D × dim` matrix.
    pub fn input_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.len(), self.dim(), |a, i| self.inputs[a][i])
    }

    pub fn subset(&self, idx: &[usize], split: Split) -> Self {
        Self {
            inputs: idx.iter().map(|&i| self.inputs[i].clone()).collect(),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
            split,
            provenance: self.provenance.clone(),
        }
    }

    /// Header `f1..fn,y`, one row per point.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut cw = csv::Writer::from_writer(w);
        let mut head: Vec<String> = (1..=self.dim()).map(|i| format!("f{i}")).collect();
        head.push("y".into());
        cw.write_record(&head)?;
        for (x, y) in self.inputs.iter().zip(&self.labels) {
            let mut rec: Vec<String> = x.iter().map(f64::to_string).collect();
            rec.push(y.to_string());
            cw.write_record(&rec)?;
        }
        cw.flush()?;
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: R, provenance: Provenance) -> Result<Self> {
        let rows = read_rows(r)?;
        let mut inputs = Vec::with_capacity(rows.len());
        let mut labels = Vec::with_capacity(rows.len());
        for (line, rec) in rows {
            let vals: Vec<f64> = rec
                .iter()
                .map(|f| f.trim().parse::<f64>().map_err(|_| Error::Parse { line, msg: format!("bad number '{f}'") }))
                .collect::<Result<_>>()?;
            let (y, x) = vals.split_last().ok_or_else(|| Error::Schema(format!("line {line}: empty row")))?;
            inputs.push(x.to_vec());
            labels.push(*y);
        }
        Self::new(inputs, labels, provenance).map_err(|e| Error::Schema(e.to_string()))
    }

    /// JSON sidecar with provenance and split.
    pub fn write_sidecar<W: Write>(&self, w: W) -> Result<()> {
        let v = serde_json::json!({
            "generator": self.provenance.generator,
            "seed": self.provenance.seed,
            "params": self.provenance.params,
            "split": self.split,
            "n_points": self.len(),
            "dim": self.dim(),
        });
        serde_json::to_writer_pretty(w, &v).map_err(|e| Error::Serde(e.to_string()))
    }

    /// Writes `<stem>.csv` and `<stem>.json` into `dir`.
    pub fn save(&self, dir: &Path, stem: &str) -> Result<()> {
        self.write_csv(std::fs::File::create(dir.join(format!("{stem}.csv")))?)?;
        let mut f = std::fs::File::create(dir.join(format!("{stem}.json")))?;
        self.write_sidecar(&mut f)?;
        writeln!(f)?;
        Ok(())
    }
}

/// Data rows with 1-based line numbers, skipping an optional non-numeric header.
fn read_rows<R: BufRead>(r: R) -> Result<Vec<(usize, csv::StringRecord)>> {
    let mut cr = csv::ReaderBuilder::new().has_headers(false).flexible(true).trim(csv::Trim::All).from_reader(r);
    let mut out = Vec::new();
    for (i, rec) in cr.records().enumerate() {
        let rec = rec?;
        if i == 0 && rec.iter().all(|f| f.parse::<f64>().is_err()) {
            continue;
        }
        if rec.iter().all(str::is_empty) {
            continue;
        }
        out.push((i + 1, rec));
    }
    Ok(out)
}

/// Loads a classification CSV (`features…, label`) and maps every feature
/// column affinely onto `interval`. Constant columns go to the midpoint.
pub fn load_csv_classification(path: &Path, n_features: usize, interval: (f64, f64)) -> Result<Dataset> {
    let file = std::io::BufReader::new(std::fs::File::open(path)?);
    let prov = Provenance {
        generator: "csv".into(),
        seed: 0,
        params: serde_json::json!({ "path": path.display().to_string(), "n_features": n_features, "interval": [interval.0, interval.1] }),
    };
    read_classification(file, n_features, interval, prov)
}

pub fn read_classification<R: BufRead>(r: R, n_features: usize, interval: (f64, f64), provenance: Provenance) -> Result<Dataset> {
    let (lo, hi) = interval;
    if !(lo < hi) {
        return Err(Error::Argument(format!("empty interval [{lo}, {hi}]")));
    }
    let mut inputs = Vec::new();
    let mut labels = Vec::new();
    for (line, rec) in read_rows(r)? {
        if rec.len() != n_features + 1 {
            return Err(Error::Schema(format!("line {line}: expected {} columns, got {}", n_features + 1, rec.len())));
        }
        let x: Vec<f64> = rec
            .iter()
            .take(n_features)
            .map(|f| f.parse::<f64>().map_err(|_| Error::Parse { line, msg: format!("bad feature '{f}'") }))
            .collect::<Result<_>>()?;
        let y = match &rec[n_features] {
            "0" => 0.0,
            "1" => 1.0,
            other => return Err(Error::Parse { line, msg: format!("label must be 0 or 1, got '{other}'") }),
        };
        inputs.push(x);
        labels.push(y);
    }
    for c in 0..n_features {
        let (mn, mx) = inputs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x[c]), b.max(x[c])));
        for x in inputs.iter_mut() {
            x[c] = if mx > mn { lo + (x[c] - mn) * (hi - lo) / (mx - mn) } else { 0.5 * (lo + hi) };
        }
    }
    Dataset::new(inputs, labels, provenance)
}

/// Random held-out split: `n_test` points go to the test set.
pub fn split(data: &Dataset, n_test: usize, seed: u64) -> Result<(Dataset, Dataset)> {
    if n_test == 0 || n_test >= data.len() {
        return Err(Error::Argument(format!("n_test must be in 1..{}, got {n_test}", data.len())));
    }
    let mut idx: Vec<usize> = (0..data.len()).collect();
    idx.shuffle(&mut rng::substream(seed, &[0x5350_4C54]));
    let (test, train) = idx.split_at(n_test);
    let mut train = train.to_vec();
    let mut test = test.to_vec();
    train.sort_unstable();
    test.sort_unstable();
    Ok((data.subset(&train, Split::Train), data.subset(&test, Split::Test)))
}
