//! Variational circuit baseline: encoder, then `L_q` layers of U3 on every
//! qubit and a CNOT ring, read out by `σ_z` on the first qubit.

use rand::Rng;
use rayon::prelude::*;
use std::f64::consts::{FRAC_PI_2, PI};

use super::label_from_probability;
use crate::data::{Dataset, Task};
use crate::error::{Error, Result};
use crate::nn::{sigmoid, Loss, Optimizer, TrainLog};
use crate::qsim::{expectation, EncoderSpec, Gate, Observable, Statevector};
use crate::rng;

#[derive(Debug, Clone)]
pub struct QnnModel {
    pub encoder: EncoderSpec,
    pub layers: usize,
    /// `θ[(layer·n + qubit)·3 + k]`.
    pub theta: Vec<f64>,
    /// Output scale; trained for regression, fixed at 1 for classification.
    pub w: f64,
    pub task: Task,
    readout: Observable,
    gradient_evals: u64,
}

impl QnnModel {
    pub fn new(encoder: EncoderSpec, layers: usize, task: Task, seed: u64) -> Result<Self> {
        if layers == 0 {
            return Err(Error::Validation("qNN needs at least one layer".into()));
        }
        let n = encoder.n;
        let mut r = rng::substream(seed, &[0x514E_4E49]);
        let theta = (0..3 * n * layers).map(|_| r.random_range(0.0..2.0 * PI)).collect();
        Ok(Self { readout: Observable::pauli_z_on(n, 0), encoder, layers, theta, w: 1.0, task, gradient_evals: 0 })
    }

    /// `3 n L_q`; the output scale is not counted.
    pub fn num_params(&self) -> usize {
        self.theta.len()
    }

    /// Circuit evaluations spent on parameter-shift gradients.
    pub fn circuit_evaluations(&self) -> u64 {
        self.gradient_evals
    }

    pub fn variational_gates(&self, theta: &[f64]) -> Vec<Gate> {
        let n = self.encoder.n;
        let mut gates = Vec::with_capacity(self.layers * 2 * n);
        for l in 0..self.layers {
            for q in 0..n {
                let p = &theta[(l * n + q) * 3..(l * n + q) * 3 + 3];
                gates.push(Gate::U3(q, p[0], p[1], p[2]));
            }
            if n > 1 {
                for q in 0..n {
                    gates.push(Gate::Cnot { control: q, target: (q + 1) % n });
                }
            }
        }
        gates
    }

    /// `Tr[ρ′ σ_z^{(1)}]` starting from an encoded state.
    pub fn readout_from(&self, encoded: &Statevector, theta: &[f64]) -> Result<f64> {
        let mut s = encoded.clone();
        s.apply_all(&self.variational_gates(theta))?;
        expectation(&s, &self.readout)
    }

    pub fn readout(&self, x: &[f64]) -> Result<f64> {
        self.readout_from(&self.encoder.encode(x)?, &self.theta)
    }

    /// `w·Tr[ρ′O′]` for regression, `σ(Tr[ρ′O′])` for classification.
    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        let e = self.readout(x)?;
        Ok(match self.task {
            Task::Regression => self.w * e,
            Task::Classification => sigmoid(e),
        })
    }

    pub fn classify(&self, x: &[f64]) -> Result<f64> {
        Ok(label_from_probability(self.predict(x)?))
    }

    /// Parameter-shift gradient of the readout: two evaluations per angle.
    pub fn readout_gradient(&self, encoded: &Statevector, theta: &[f64]) -> Result<Vec<f64>> {
        let mut shifted = theta.to_vec();
        let mut g = Vec::with_capacity(theta.len());
        for p in 0..theta.len() {
            shifted[p] = theta[p] + FRAC_PI_2;
            let plus = self.readout_from(encoded, &shifted)?;
            shifted[p] = theta[p] - FRAC_PI_2;
            let minus = self.readout_from(encoded, &shifted)?;
            shifted[p] = theta[p];
            g.push(0.5 * (plus - minus));
        }
        Ok(g)
    }

    /// Full-batch training. Regression optimises `(θ, w)` on MSE; classification
    /// optimises `θ` on cross-entropy of `σ(Tr[ρ′O′])`.
    pub fn train(&mut self, data: &Dataset, opt: &mut Optimizer, steps: usize) -> Result<TrainLog> {
        if data.is_empty() {
            return Err(Error::Argument("empty training set".into()));
        }
        let loss = match self.task {
            Task::Regression => Loss::Mse,
            Task::Classification => Loss::Bce,
        };
        loss.check_labels(&data.labels)?;
        let encoded: Vec<Statevector> = data.inputs.par_iter().map(|x| self.encoder.encode(x)).collect::<Result<_>>()?;
        let np = self.theta.len();
        let train_w = self.task == Task::Regression;
        let mut params = self.theta.clone();
        if train_w {
            params.push(self.w);
        }
        let mut log = TrainLog::default();
        for step in 0..=steps {
            let theta = &params[..np];
            let w = if train_w { params[np] } else { 1.0 };
            let readouts: Vec<f64> = encoded.par_iter().map(|s| self.readout_from(s, theta)).collect::<Result<_>>()?;
            let outputs: Vec<f64> = readouts.iter().map(|e| if train_w { w * e } else { *e }).collect();
            let cost = loss.cost(&outputs, &data.labels);
            if !cost.is_finite() {
                return Err(Error::Divergence { step, msg: format!("cost became {cost}") });
            }
            log.cost.push(cost);
            log.test_metric.push(None);
            if step == steps {
                break;
            }
            let dl = loss.output_grad(&outputs, &data.labels);
            let per_point: Vec<Vec<f64>> = encoded.par_iter().map(|s| self.readout_gradient(s, theta)).collect::<Result<_>>()?;
            self.gradient_evals += (2 * np * data.len()) as u64;
            let mut grad = vec![0.0; params.len()];
            for (a, ga) in per_point.iter().enumerate() {
                let scale = dl[a] * w;
                for p in 0..np {
                    grad[p] += scale * ga[p];
                }
                if train_w {
                    grad[np] += dl[a] * readouts[a];
                }
            }
            opt.step(&mut params, &grad)?;
        }
        self.theta = params[..np].to_vec();
        if train_w {
            self.w = params[np];
        }
        Ok(log)
    }
}
