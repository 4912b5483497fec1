//! Run configuration: a TOML file with one section per concern, plus
//! command-line overrides applied before validation.

use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

use qntk::data::{ObservableForm, Task};
use qntk::models::CompareConfig;
use qntk::nn::{Activation, Batch, InitScheme, Loss};
use qntk::qsim::Ansatz;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    TheoryKernel,
    TrainQcnn,
    TrainQnn,
    TrainCnn,
    Compare,
    LocalitySweep,
    ShotSweep,
    NtkConvergence,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::TheoryKernel => "theory-kernel",
            Experiment::TrainQcnn => "train-qcnn",
            Experiment::TrainQnn => "train-qnn",
            Experiment::TrainCnn => "train-cnn",
            Experiment::Compare => "compare",
            Experiment::LocalitySweep => "locality-sweep",
            Experiment::ShotSweep => "shot-sweep",
            Experiment::NtkConvergence => "ntk-convergence",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: Experiment,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    #[serde(default)]
    pub encoder: EncoderSection,
    #[serde(default)]
    pub kernel: KernelSection,
    #[serde(default)]
    pub optimizer: OptimizerSection,
    #[serde(default)]
    pub dataset: DatasetSection,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compare: Option<CompareConfig>,
}

fn default_out() -> PathBuf {
    PathBuf::from("runs")
}

/// Encoding circuit. The qubit count defaults to the input dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EncoderSection {
    #[serde(default = "default_ansatz")]
    pub ansatz: Ansatz,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth_repeats: Option<usize>,
    /// Variational layers of the qNN.
    #[serde(default = "default_qnn_layers")]
    pub qnn_layers: usize,
}

fn default_ansatz() -> Ansatz {
    Ansatz::Bc
}
fn default_qnn_layers() -> usize {
    10
}

impl Default for EncoderSection {
    fn default() -> Self {
        Self { ansatz: default_ansatz(), n: None, depth_repeats: None, qnn_layers: default_qnn_layers() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputMode {
    Quantum,
    Classical,
}

/// Network and kernel architecture.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelSection {
    #[serde(default = "default_input")]
    pub input: InputMode,
    /// Depth used by the analytic kernels.
    #[serde(default = "one")]
    pub layers: usize,
    #[serde(default = "default_xi")]
    pub xi: f64,
    #[serde(default = "default_activation")]
    pub activation: Activation,
    /// Measurement locality.
    #[serde(default = "one")]
    pub m: usize,
    /// Number of random measurements, i.e. the head input width.
    #[serde(default = "default_n0")]
    pub n0: usize,
    #[serde(default = "default_init")]
    pub init: InitScheme,
    #[serde(default = "default_pd_tol")]
    pub pd_tol: f64,
}

fn default_input() -> InputMode {
    InputMode::Quantum
}
fn one() -> usize {
    1
}
fn default_xi() -> f64 {
    1.0
}
fn default_activation() -> Activation {
    Activation::Relu
}
fn default_n0() -> usize {
    1000
}
fn default_init() -> InitScheme {
    InitScheme::UnitGaussian
}
fn default_pd_tol() -> f64 {
    qntk::kernel::DEFAULT_PD_TOL
}

impl Default for KernelSection {
    fn default() -> Self {
        Self {
            input: default_input(),
            layers: 1,
            xi: default_xi(),
            activation: default_activation(),
            m: 1,
            n0: default_n0(),
            init: default_init(),
            pd_tol: default_pd_tol(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerName {
    Sgd,
    Adam,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerSection {
    #[serde(default = "default_opt")]
    pub kind: OptimizerName,
    #[serde(default = "default_lr")]
    pub lr: f64,
    #[serde(default = "default_steps")]
    pub steps: usize,
    #[serde(default = "default_batch")]
    pub batch: Batch,
    /// Loss for the theory curves; training always uses the task's loss.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub loss: Option<Loss>,
}

fn default_opt() -> OptimizerName {
    OptimizerName::Sgd
}
fn default_lr() -> f64 {
    1e-4
}
fn default_steps() -> usize {
    1000
}
fn default_batch() -> Batch {
    Batch::Full
}

impl Default for OptimizerSection {
    fn default() -> Self {
        Self { kind: default_opt(), lr: default_lr(), steps: default_steps(), batch: default_batch(), loss: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DatasetKind {
    Sin,
    HardSin,
    Adhoc,
    Quantum,
    Csv,
    Inline,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSection {
    #[serde(default = "default_kind")]
    pub kind: DatasetKind,
    #[serde(default = "default_n_train")]
    pub n_train: usize,
    #[serde(default)]
    pub n_test: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_sd: Option<f64>,
    /// Task for `quantum` and `inline` data.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub task: Option<Task>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observable: Option<ObservableForm>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_features: Option<usize>,
    /// Target range of the min-max scaling applied to CSV features.
    #[serde(default = "default_interval")]
    pub interval: [f64; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<f64>>,
}

fn default_kind() -> DatasetKind {
    DatasetKind::Sin
}
fn default_n_train() -> usize {
    100
}
fn default_interval() -> [f64; 2] {
    [0.0, std::f64::consts::PI]
}

impl Default for DatasetSection {
    fn default() -> Self {
        Self {
            kind: default_kind(),
            n_train: default_n_train(),
            n_test: 0,
            noise_sd: None,
            task: None,
            observable: None,
            threshold: None,
            path: None,
            n_features: None,
            interval: default_interval(),
            points: None,
            labels: None,
        }
    }
}

/// Grids scanned by the sweep experiments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    #[serde(default = "default_m_values")]
    pub m_values: Vec<usize>,
    #[serde(default = "default_n0_values")]
    pub n0_values: Vec<usize>,
    #[serde(default = "default_shots")]
    pub shots: Vec<u64>,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    /// Number of time points on theory curves.
    #[serde(default = "default_points")]
    pub points: usize,
}

fn default_m_values() -> Vec<usize> {
    vec![1, 2, 3, 4, 6]
}
fn default_n0_values() -> Vec<usize> {
    vec![100, 1000, 10_000]
}
fn default_shots() -> Vec<u64> {
    vec![100, 1000, 10_000, 100_000]
}
fn default_seeds() -> Vec<u64> {
    (0..5).collect()
}
fn default_points() -> usize {
    201
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            m_values: default_m_values(),
            n0_values: default_n0_values(),
            shots: default_shots(),
            seeds: default_seeds(),
            points: default_points(),
        }
    }
}

/// Reads `path`, applies `key=value` overrides and the flag values, then
/// deserializes and validates.
pub fn load(path: &Path, overrides: &[String], seed: Option<u64>, out: Option<&Path>) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut table: toml::Table = toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    for o in overrides {
        apply_override(&mut table, o)?;
    }
    if let Some(s) = seed {
        table.insert("seed".into(), toml::Value::Integer(s as i64));
    }
    if let Some(o) = out {
        table.insert("out".into(), toml::Value::String(o.display().to_string()));
    }
    let cfg: RunConfig = serde_path_to_error::deserialize(toml::Value::Table(table)).map_err(|e| {
        let field = e.path().to_string();
        let msg = e.into_inner().to_string();
        CliError::Config(format!("field '{field}': {}", msg.lines().next().unwrap_or_default()))
    })?;
    cfg.validate()?;
    Ok(cfg)
}

/// `a.b.c=value`; the value is read as a TOML literal, falling back to a
/// bare string.
pub fn apply_override(table: &mut toml::Table, spec: &str) -> Result<(), CliError> {
    let (key, raw) = spec.split_once('=').ok_or_else(|| CliError::Config(format!("override '{spec}' is not key=value")))?;
    let parts: Vec<&str> = key.trim().split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(CliError::Config(format!("override '{spec}' has an empty key segment")));
    }
    let value = match toml::from_str::<toml::Table>(&format!("v = {}", raw.trim())) {
        Ok(mut t) => t.remove("v").expect("parsed key"),
        Err(_) => toml::Value::String(raw.trim().to_string()),
    };
    let mut cur = table;
    for p in &parts[..parts.len() - 1] {
        let entry = cur.entry(p.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry.as_table_mut().ok_or_else(|| CliError::Config(format!("override '{spec}': '{p}' is not a section")))?;
    }
    cur.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |field: &str, msg: String| Err(CliError::Config(format!("field '{field}': {msg}")));
        if !(self.optimizer.lr >= 0.0 && self.optimizer.lr.is_finite()) {
            return bad("optimizer.lr", format!("must be a non-negative number, got {}", self.optimizer.lr));
        }
        if !(self.kernel.xi >= 0.0 && self.kernel.xi.is_finite()) {
            return bad("kernel.xi", format!("must be non-negative, got {}", self.kernel.xi));
        }
        if self.kernel.n0 == 0 {
            return bad("kernel.n0", "must be positive".into());
        }
        if self.kernel.m == 0 {
            return bad("kernel.m", "must be positive".into());
        }
        if self.kernel.layers == 0 {
            return bad("kernel.layers", "must be positive".into());
        }
        if self.encoder.qnn_layers == 0 {
            return bad("encoder.qnn_layers", "must be positive".into());
        }
        if self.sweep.points < 2 {
            return bad("sweep.points", "needs at least 2 time points".into());
        }
        let [lo, hi] = self.dataset.interval;
        if !(lo < hi) {
            return bad("dataset.interval", format!("[{lo}, {hi}] is empty"));
        }
        match self.dataset.kind {
            DatasetKind::Csv if self.dataset.path.is_none() => return bad("dataset.path", "required for csv data".into()),
            DatasetKind::Csv if self.dataset.n_features.is_none() => return bad("dataset.n_features", "required for csv data".into()),
            DatasetKind::Inline if self.dataset.points.as_ref().is_none_or(Vec::is_empty) => {
                return bad("dataset.points", "required for inline data".into())
            }
            _ => {}
        }
        if let (Some(p), Some(l)) = (&self.dataset.points, &self.dataset.labels) {
            if p.len() != l.len() {
                return bad("dataset.labels", format!("{} labels for {} points", l.len(), p.len()));
            }
        }
        match self.experiment {
            Experiment::Compare if self.compare.is_none() => bad("compare", "section required for the compare experiment".into()),
            Experiment::LocalitySweep if self.sweep.m_values.is_empty() => bad("sweep.m_values", "must not be empty".into()),
            Experiment::ShotSweep if self.sweep.shots.contains(&0) || self.sweep.shots.is_empty() => {
                bad("sweep.shots", "needs positive shot counts".into())
            }
            Experiment::ShotSweep if self.dataset.n_test == 0 => bad("dataset.n_test", "shot sweep evaluates on a test set".into()),
            Experiment::NtkConvergence if self.sweep.n0_values.is_empty() || self.sweep.seeds.is_empty() => {
                bad("sweep", "n0_values and seeds must not be empty".into())
            }
            _ => Ok(()),
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run configs serialize")
    }
}
