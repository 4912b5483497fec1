//! Encoder → frozen random measurements → trainable classical head.

use nalgebra::DMatrix;

use super::{label_from_probability, loss_for, output_for};
use crate::data::{Dataset, Task};
use crate::error::{Error, Result};
use crate::nn::{train, Batch, InitScheme, NetworkConfig, NetworkState, Optimizer, TrainLog, TrainOptions};
use crate::qsim::{feature_matrix, EncoderSpec, RandomMeasurement, Shots};
use crate::rng;

#[derive(Debug, Clone)]
pub struct QcnnModel {
    pub encoder: EncoderSpec,
    pub measurement: RandomMeasurement,
    pub head: NetworkState,
    pub task: Task,
    circuit_evals: u64,
}

/// Result of [`QcnnModel::train`]: the log plus the cached training features.
#[derive(Debug, Clone)]
pub struct QcnnTraining {
    pub log: TrainLog,
    pub features: DMatrix<f64>,
}

impl QcnnModel {
    pub fn new(encoder: EncoderSpec, measurement: RandomMeasurement, head: NetworkState, task: Task) -> Result<Self> {
        if encoder.n != measurement.num_qubits() {
            return Err(Error::Shape(format!("encoder has {} qubits, measurement {}", encoder.n, measurement.num_qubits())));
        }
        if head.config.input_width() != measurement.len() {
            return Err(Error::Shape(format!("head expects {} features, measurement gives {}", head.config.input_width(), measurement.len())));
        }
        Ok(Self { encoder, measurement, head, task, circuit_evals: 0 })
    }

    /// Single-layer head of width `n0` on locality-`m` features. Unitaries
    /// and head draw from separate substreams of `seed`.
    pub fn build(encoder: EncoderSpec, m: usize, n0: usize, task: Task, xi: f64, init: InitScheme, seed: u64) -> Result<Self> {
        let meas = RandomMeasurement::sample(encoder.n, m, n0, None, rng::derive_seed(seed, &[0x5155_4E54]))?;
        let cfg = NetworkConfig::new(vec![n0, 1], xi, crate::nn::Activation::Identity)?.with_output(output_for(task)).with_init(init);
        let head = NetworkState::init(cfg, rng::derive_seed(seed, &[0x4845_4144]))?;
        Self::new(encoder, meas, head, task)
    }

    /// Trainable parameters excluding the output bias.
    pub fn num_params(&self) -> usize {
        self.head.num_params() - 1
    }

    /// Quantum-circuit evaluations so far: `n_0` per input featurised.
    pub fn circuit_evaluations(&self) -> u64 {
        self.circuit_evals
    }

    pub fn features(&mut self, xs: &[Vec<f64>], shots: Option<Shots>) -> Result<DMatrix<f64>> {
        let f = feature_matrix(xs, &self.encoder, &self.measurement, shots)?;
        self.circuit_evals += (xs.len() * self.measurement.len()) as u64;
        Ok(f)
    }

    /// Regression value or class-1 probability from a feature vector.
    pub fn predict_features(&self, f: &[f64]) -> Result<f64> {
        self.head.predict(f)
    }

    pub fn predict(&mut self, x: &[f64], shots: Option<Shots>) -> Result<f64> {
        let f = self.features(&[x.to_vec()], shots)?;
        let row: Vec<f64> = f.row(0).iter().copied().collect();
        self.predict_features(&row)
    }

    pub fn predict_batch(&mut self, xs: &[Vec<f64>], shots: Option<Shots>) -> Result<Vec<f64>> {
        let f = self.features(xs, shots)?;
        let raw = self.head.forward_batch(&f)?;
        Ok(raw.into_iter().map(|v| self.head.config.output.apply(v)).collect())
    }

    /// Class label with the `σ ≥ 0.5 → 1` rule.
    pub fn classify(&mut self, x: &[f64], shots: Option<Shots>) -> Result<f64> {
        Ok(label_from_probability(self.predict(x, shots)?))
    }

    /// Featurises the training inputs once, then trains only the head.
    pub fn train(&mut self, data: &Dataset, opt: &mut Optimizer, steps: usize, batch: Batch, shots: Option<Shots>) -> Result<QcnnTraining> {
        let features = self.features(&data.inputs, shots)?;
        let log = self.train_on_features(&features, &data.labels, opt, steps, batch)?;
        Ok(QcnnTraining { log, features })
    }

    /// Trains the head on precomputed features.
    pub fn train_on_features(&mut self, features: &DMatrix<f64>, labels: &[f64], opt: &mut Optimizer, steps: usize, batch: Batch) -> Result<TrainLog> {
        let options = TrainOptions { loss: loss_for(self.task), steps, batch, seed: self.head.seed };
        train(&mut self.head, features, labels, opt, &options)
    }
}
