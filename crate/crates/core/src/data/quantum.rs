//! Data labelled by a fixed random quantum circuit:
//! `x ~ U[0, 2π]^n`, `g(x) = ⟨ψ(x)|O|ψ(x)⟩`.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::dataset::{Dataset, Provenance, Split};
use crate::error::{Error, Result};
use crate::qsim::{expectation, EncoderSpec, Observable};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Regression,
    Classification,
}

/// Form of the labelling observable built from `(σ_z + 1)/2` factors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObservableForm {
    /// `Σ_i (σ_z^{(i)} + 1)/2`, with `g ∈ [0, n]`.
    Sum,
    /// `⊗_i (σ_z^{(i)} + 1)/2`, with `g ∈ [0, 1]`.
    Product,
}

impl ObservableForm {
    pub fn observable(self, n: usize) -> Observable {
        match self {
            ObservableForm::Sum => Observable::z_projector_sum(n),
            ObservableForm::Product => Observable::z_projector_product(n),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuantumDataConfig {
    pub n: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub task: Task,
    #[serde(default = "default_form")]
    pub observable: ObservableForm,
    /// Standard deviation of regression label noise.
    #[serde(default = "default_noise")]
    pub noise_sd: f64,
    /// Classification threshold on `g`; defaults to `n/2`.
    #[serde(default)]
    pub threshold: Option<f64>,
}

fn default_form() -> ObservableForm {
    ObservableForm::Sum
}

fn default_noise() -> f64 {
    0.01
}

impl QuantumDataConfig {
    pub fn new(n: usize, n_train: usize, n_test: usize, task: Task) -> Self {
        Self { n, n_train, n_test, task, observable: ObservableForm::Sum, noise_sd: default_noise(), threshold: None }
    }

    pub fn threshold(&self) -> f64 {
        self.threshold.unwrap_or(self.n as f64 / 2.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumData {
    pub train: Dataset,
    pub test: Dataset,
    /// Frozen encoder shared with the models.
    pub encoder: EncoderSpec,
    pub observable: Observable,
    /// Standardisation `c = 1/std(g)` over the training inputs.
    pub scale: f64,
    pub train_noise: Vec<f64>,
    pub test_noise: Vec<f64>,
}

/// `g(x)` for each input.
pub fn target_values(xs: &[Vec<f64>], encoder: &EncoderSpec, obs: &Observable) -> Result<Vec<f64>> {
    xs.par_iter().map(|x| expectation(&encoder.encode(x)?, obs)).collect()
}

fn draw_inputs(n: usize, count: usize, seed: u64, tag: u64) -> Vec<Vec<f64>> {
    let mut r = rng::substream(seed, &[0x5144_4154, tag]);
    (0..count).map(|_| (0..n).map(|_| r.random_range(0.0..2.0 * PI)).collect()).collect()
}

pub fn gen_quantum_data(cfg: &QuantumDataConfig, seed: u64) -> Result<QuantumData> {
    if cfg.n == 0 || cfg.n_train == 0 || cfg.n_test == 0 {
        return Err(Error::Argument("qubit count and split sizes must be positive".into()));
    }
    let encoder = EncoderSpec::quantum_data(cfg.n, rng::derive_seed(seed, &[0x4349_5243]))?;
    let obs = cfg.observable.observable(cfg.n);
    let xs_train = draw_inputs(cfg.n, cfg.n_train, seed, 0);
    let xs_test = draw_inputs(cfg.n, cfg.n_test, seed, 1);
    let g_train = target_values(&xs_train, &encoder, &obs)?;
    let g_test = target_values(&xs_test, &encoder, &obs)?;
    let mean = g_train.iter().sum::<f64>() / g_train.len() as f64;
    let var = g_train.iter().map(|g| (g - mean) * (g - mean)).sum::<f64>() / g_train.len() as f64;
    let scale = if var > 0.0 { 1.0 / var.sqrt() } else { 1.0 };
    let noise = Normal::new(0.0, cfg.noise_sd).map_err(|e| Error::Argument(e.to_string()))?;
    let draw_noise = |count: usize, tag: u64| -> Vec<f64> {
        let mut r = rng::substream(seed, &[0x4E4F_4953, tag]);
        match cfg.task {
            Task::Regression if cfg.noise_sd > 0.0 => (0..count).map(|_| noise.sample(&mut r)).collect(),
            _ => vec![0.0; count],
        }
    };
    let train_noise = draw_noise(cfg.n_train, 0);
    let test_noise = draw_noise(cfg.n_test, 1);
    let label = |g: f64, eps: f64| match cfg.task {
        Task::Regression => scale * g + eps,
        Task::Classification => {
            if g >= cfg.threshold() {
                1.0
            } else {
                0.0
            }
        }
    };
    let params = serde_json::to_value(cfg).map_err(|e| Error::Serde(e.to_string()))?;
    let prov = Provenance { generator: "quantum".into(), seed, params };
    let mut train = Dataset::new(xs_train, g_train.iter().zip(&train_noise).map(|(&g, &e)| label(g, e)).collect(), prov.clone())?;
    let mut test = Dataset::new(xs_test, g_test.iter().zip(&test_noise).map(|(&g, &e)| label(g, e)).collect(), prov)?;
    train.split = Split::Train;
    test.split = Split::Test;
    Ok(QuantumData { train, test, encoder, observable: obs, scale, train_noise, test_noise })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsim::zero_state;

    #[test]
    fn observable_on_zero_state() {
        let s = zero_state(3).unwrap();
        assert_eq!(expectation(&s, &ObservableForm::Product.observable(3)).unwrap(), 1.0);
        assert_eq!(expectation(&s, &ObservableForm::Sum.observable(3)).unwrap(), 3.0);
    }

    #[test]
    fn labels_reproduce_from_encoder() {
        let cfg = QuantumDataConfig::new(3, 40, 10, Task::Classification);
        let d = gen_quantum_data(&cfg, 7).unwrap();
        let g = target_values(&d.train.inputs, &d.encoder, &d.observable).unwrap();
        for (gv, y) in g.iter().zip(&d.train.labels) {
            assert_eq!(*y, if *gv >= 1.5 { 1.0 } else { 0.0 });
        }
        assert_eq!(d, gen_quantum_data(&cfg, 7).unwrap());
    }

    #[test]
    fn regression_labels_recompute_with_noise() {
        let cfg = QuantumDataConfig::new(2, 30, 5, Task::Regression);
        let d = gen_quantum_data(&cfg, 1).unwrap();
        let g = target_values(&d.test.inputs, &d.encoder, &d.observable).unwrap();
        for ((gv, e), y) in g.iter().zip(&d.test_noise).zip(&d.test.labels) {
            assert!((d.scale * gv + e - y).abs() < 1e-15);
        }
    }
}
