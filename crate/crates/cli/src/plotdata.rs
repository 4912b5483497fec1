//! Converts run artifacts into long-format `series,x,y` CSV files under
//! `<dir>/plotdata/`. Values are copied verbatim, so reruns are
//! byte-identical.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use crate::error::CliError;

type Rows = Vec<(String, String, String)>;

struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn read(path: &Path) -> Result<Self, CliError> {
        let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_path(path)?;
        let header = r.headers()?.iter().map(str::to_string).collect();
        let rows = r.records().map(|rec| rec.map(|v| v.iter().map(str::to_string).collect())).collect::<Result<_, _>>()?;
        Ok(Self { header, rows })
    }

    fn col(&self, name: &str) -> Result<usize, CliError> {
        self.header.iter().position(|h| h == name).ok_or_else(|| CliError::Runtime(format!("artifact lacks column '{name}'")))
    }

    /// `(series, row[x], row[y])` for every row with a non-empty `y`.
    fn series(&self, series: &str, x: &str, y: &str) -> Result<Rows, CliError> {
        let (xi, yi) = (self.col(x)?, self.col(y)?);
        Ok(self.rows.iter().filter(|r| !r[yi].is_empty()).map(|r| (series.to_string(), r[xi].clone(), r[yi].clone())).collect())
    }

    fn grouped(&self, group: &str, x: &str, y: &str) -> Result<Rows, CliError> {
        let (gi, xi, yi) = (self.col(group)?, self.col(x)?, self.col(y)?);
        Ok(self.rows.iter().map(|r| (r[gi].clone(), r[xi].clone(), r[yi].clone())).collect())
    }
}

fn write(dir: &Path, name: &str, rows: &Rows) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(dir.join(name))?));
    w.write_record(["series", "x", "y"])?;
    for (s, x, y) in rows {
        w.write_record([s, x, y])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads the manifest in `dir` and writes one plot file per figure.
/// Returns the names of the files written.
pub fn emit(dir: &Path) -> Result<Vec<String>, CliError> {
    let manifest_path = dir.join("manifest.json");
    let text = std::fs::read_to_string(&manifest_path).map_err(|e| CliError::Runtime(format!("cannot read {}: {e}", manifest_path.display())))?;
    let manifest: serde_json::Value = serde_json::from_str(&text).map_err(|e| CliError::Runtime(format!("bad manifest: {e}")))?;
    let artifacts: Vec<String> = manifest["artifacts"]
        .as_array()
        .ok_or_else(|| CliError::Runtime("manifest lists no artifacts".into()))?
        .iter()
        .filter_map(|v| v.as_str().map(str::to_string))
        .collect();
    for a in &artifacts {
        if !dir.join(a).exists() {
            return Err(CliError::Runtime(format!("missing artifact {a}")));
        }
    }

    let mut figures: BTreeMap<String, Rows> = BTreeMap::new();
    let mut add = |fig: &str, rows: Rows| figures.entry(fig.to_string()).or_default().extend(rows);
    let mut locality: Vec<(usize, String)> = Vec::new();
    for a in &artifacts {
        let path = dir.join(a);
        match a.as_str() {
            "trajectory.csv" => {
                let t = Table::read(&path)?;
                add("cost.csv", t.series("simulation", "step", "cost")?);
                let metric = t.series("test_metric", "step", "test_metric")?;
                if !metric.is_empty() {
                    add("test_metric.csv", metric);
                }
            }
            "theory.csv" => add("cost.csv", Table::read(&path)?.series("theory", "t", "cost")?),
            "eigenvalues.csv" => add("eigenvalues.csv", Table::read(&path)?.series("eigenvalue", "index", "eigenvalue")?),
            "report.csv" => add("compare.csv", Table::read(&path)?.grouped("model", "n", "test_metric")?),
            "summary.csv" => add("compare_median.csv", Table::read(&path)?.grouped("model", "n", "test_median")?),
            "shots.csv" => {
                let t = Table::read(&path)?;
                let metric = t.header[1].clone();
                let mut rows = t.series(&metric, "shots", &metric)?;
                rows.extend(t.series("rmse_vs_exact", "shots", "rmse_vs_exact")?);
                add("shots.csv", rows);
            }
            "convergence.csv" => {
                let t = Table::read(&path)?;
                let (si, ni, ei) = (t.col("seed")?, t.col("n0")?, t.col("rel_error")?);
                add("ntk_convergence.csv", t.rows.iter().map(|r| (format!("seed {}", r[si]), r[ni].clone(), r[ei].clone())).collect());
            }
            other => {
                if let Some(m) = other.strip_prefix("theory_m").and_then(|s| s.strip_suffix(".csv")).and_then(|s| s.parse::<usize>().ok()) {
                    locality.push((m, a.clone()));
                } else if let Some(m) = other.strip_prefix("eigen_m").and_then(|s| s.strip_suffix(".csv")) {
                    add("locality_eigenvalues.csv", Table::read(&path)?.series(&format!("m={m}"), "index", "eigenvalue")?);
                }
            }
        }
    }
    locality.sort();
    for (m, a) in locality {
        add("locality.csv", Table::read(&dir.join(a))?.series(&format!("m={m}"), "t", "cost")?);
    }

    let out = dir.join("plotdata");
    std::fs::create_dir_all(&out)?;
    for (name, rows) in &figures {
        write(&out, name, rows)?;
    }
    Ok(figures.into_keys().collect())
}
