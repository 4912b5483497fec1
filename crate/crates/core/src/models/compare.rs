//! Side-by-side training of qcNN, qNN and cNN on circuit-generated data.

use serde::{Deserialize, Serialize};
use std::io::Write;

use super::{accuracy, rmse, CnnModel, QcnnModel, QnnModel};
use crate::data::{gen_quantum_data, ObservableForm, QuantumDataConfig, Task};
use crate::error::{Error, Result};
use crate::nn::{Batch, InitScheme, Optimizer};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Qcnn,
    Qnn,
    Cnn,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Qcnn => "qcnn",
            ModelKind::Qnn => "qnn",
            ModelKind::Cnn => "cnn",
        }
    }

    fn tag(self) -> u64 {
        self as u64 + 1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareConfig {
    pub task: Task,
    pub n_values: Vec<usize>,
    pub seeds: Vec<u64>,
    pub n_train: usize,
    pub n_test: usize,
    #[serde(default = "default_models")]
    pub models: Vec<ModelKind>,
    #[serde(default = "default_n0")]
    pub n0: usize,
    /// Locality of the qcNN measurements.
    #[serde(default = "default_m")]
    pub m: usize,
    #[serde(default = "default_qnn_layers")]
    pub qnn_layers: usize,
    #[serde(default = "default_xi")]
    pub xi: f64,
    #[serde(default = "default_lr")]
    pub lr: f64,
    #[serde(default = "default_steps")]
    pub qcnn_steps: usize,
    #[serde(default = "default_steps")]
    pub cnn_steps: usize,
    #[serde(default = "default_qnn_steps")]
    pub qnn_steps: usize,
    #[serde(default = "default_observable")]
    pub observable: ObservableForm,
}

fn default_models() -> Vec<ModelKind> {
    vec![ModelKind::Qcnn, ModelKind::Qnn, ModelKind::Cnn]
}
fn default_n0() -> usize {
    1000
}
fn default_m() -> usize {
    1
}
fn default_qnn_layers() -> usize {
    10
}
fn default_xi() -> f64 {
    1.0
}
fn default_lr() -> f64 {
    1e-3
}
fn default_steps() -> usize {
    2000
}
fn default_qnn_steps() -> usize {
    1000
}
fn default_observable() -> ObservableForm {
    ObservableForm::Sum
}

impl CompareConfig {
    pub fn new(task: Task, n_values: Vec<usize>, seeds: Vec<u64>, n_train: usize, n_test: usize) -> Self {
        Self {
            task,
            n_values,
            seeds,
            n_train,
            n_test,
            models: default_models(),
            n0: default_n0(),
            m: default_m(),
            qnn_layers: default_qnn_layers(),
            xi: default_xi(),
            lr: default_lr(),
            qcnn_steps: default_steps(),
            cnn_steps: default_steps(),
            qnn_steps: default_qnn_steps(),
            observable: default_observable(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub model: ModelKind,
    pub n: usize,
    pub seed: u64,
    /// RMSE for regression, accuracy for classification.
    pub train_metric: f64,
    pub test_metric: f64,
    pub n_params: usize,
    pub circuit_evals: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub model: ModelKind,
    pub n: usize,
    pub train_mean: f64,
    pub train_std: f64,
    pub test_mean: f64,
    pub test_std: f64,
    pub test_median: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CompareReport {
    pub rows: Vec<ReportRow>,
}

fn stats(v: &[f64]) -> (f64, f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let std = if v.len() > 1 { (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt() } else { 0.0 };
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let mid = s.len() / 2;
    let median = if s.len() % 2 == 1 { s[mid] } else { 0.5 * (s[mid - 1] + s[mid]) };
    (mean, std, median)
}

impl CompareReport {
    pub fn summary(&self) -> Vec<SummaryRow> {
        let mut keys: Vec<(ModelKind, usize)> = self.rows.iter().map(|r| (r.model, r.n)).collect();
        keys.sort();
        keys.dedup();
        keys.into_iter()
            .map(|(model, n)| {
                let sel: Vec<&ReportRow> = self.rows.iter().filter(|r| r.model == model && r.n == n).collect();
                let tr: Vec<f64> = sel.iter().map(|r| r.train_metric).collect();
                let te: Vec<f64> = sel.iter().map(|r| r.test_metric).collect();
                let (train_mean, train_std, _) = stats(&tr);
                let (test_mean, test_std, test_median) = stats(&te);
                SummaryRow { model, n, train_mean, train_std, test_mean, test_std, test_median }
            })
            .collect()
    }

    pub fn median_test(&self, model: ModelKind, n: usize) -> Option<f64> {
        self.summary().into_iter().find(|s| s.model == model && s.n == n).map(|s| s.test_median)
    }

    /// Columns: model, n, seed, train_metric, test_metric, n_params, circuit_evals.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut cw = csv::Writer::from_writer(w);
        for r in &self.rows {
            cw.serialize(r)?;
        }
        cw.flush()?;
        Ok(())
    }

    pub fn write_summary_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut cw = csv::Writer::from_writer(w);
        for r in self.summary() {
            cw.serialize(r)?;
        }
        cw.flush()?;
        Ok(())
    }
}

fn metric(task: Task, pred: &[f64], y: &[f64]) -> f64 {
    match task {
        Task::Regression => rmse(pred, y),
        Task::Classification => accuracy(pred, y),
    }
}

/// Trains every requested model for every `(n, seed)` on the same data.
pub fn compare_models(cfg: &CompareConfig) -> Result<CompareReport> {
    if cfg.n_values.is_empty() || cfg.seeds.is_empty() || cfg.models.is_empty() {
        return Err(Error::Argument("comparison needs qubit counts, seeds and models".into()));
    }
    let mut report = CompareReport::default();
    for &n in &cfg.n_values {
        for &seed in &cfg.seeds {
            let mut dcfg = QuantumDataConfig::new(n, cfg.n_train, cfg.n_test, cfg.task);
            dcfg.observable = cfg.observable;
            let data = gen_quantum_data(&dcfg, rng::derive_seed(seed, &[0x4441_5441, n as u64]))?;
            for &kind in &cfg.models {
                let mseed = rng::derive_seed(seed, &[kind.tag(), n as u64]);
                let row = run_one(cfg, kind, n, seed, mseed, &data)?;
                report.rows.push(row);
            }
        }
    }
    Ok(report)
}

fn run_one(cfg: &CompareConfig, kind: ModelKind, n: usize, seed: u64, mseed: u64, data: &crate::data::QuantumData) -> Result<ReportRow> {
    let task = cfg.task;
    let mut opt = Optimizer::adam(cfg.lr)?;
    let (train_pred, test_pred, n_params, evals) = match kind {
        ModelKind::Qcnn => {
            let mut model = QcnnModel::build(data.encoder.clone(), cfg.m, cfg.n0, task, cfg.xi, InitScheme::HeScaled, mseed)?;
            let trained = model.train(&data.train, &mut opt, cfg.qcnn_steps, Batch::Full, None)?;
            let tr = trained.features.row_iter().map(|r| model.predict_features(&r.iter().copied().collect::<Vec<_>>())).collect::<Result<Vec<_>>>()?;
            let te = model.predict_batch(&data.test.inputs, None)?;
            (tr, te, model.num_params(), model.circuit_evaluations())
        }
        ModelKind::Qnn => {
            let mut model = QnnModel::new(data.encoder.clone(), cfg.qnn_layers, task, mseed)?;
            model.train(&data.train, &mut opt, cfg.qnn_steps)?;
            let tr = data.train.inputs.iter().map(|x| model.predict(x)).collect::<Result<Vec<_>>>()?;
            let te = data.test.inputs.iter().map(|x| model.predict(x)).collect::<Result<Vec<_>>>()?;
            (tr, te, model.num_params(), model.circuit_evaluations())
        }
        ModelKind::Cnn => {
            let mut model = CnnModel::new(n, cfg.n0, task, cfg.xi, InitScheme::HeScaled, mseed)?;
            model.train(&data.train, &mut opt, cfg.cnn_steps, Batch::Full)?;
            (model.predict_batch(&data.train.inputs)?, model.predict_batch(&data.test.inputs)?, model.num_params(), 0)
        }
    };
    Ok(ReportRow {
        model: kind,
        n,
        seed,
        train_metric: metric(task, &train_pred, &data.train.labels),
        test_metric: metric(task, &test_pred, &data.test.labels),
        n_params,
        circuit_evals: evals,
    })
}
