use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use std::io::Write;

use super::activation::sigmoid;
use super::network::NetworkState;
use super::optim::Optimizer;
use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Loss {
    /// `½ Σ_a (f_a − y_a)²`.
    Mse,
    /// `−Σ_a [y_a ln σ(f_a) + (1 − y_a) ln(1 − σ(f_a))]`.
    Bce,
}

fn softplus(v: f64) -> f64 {
    if v > 0.0 {
        v + (-v).exp().ln_1p()
    } else {
        v.exp().ln_1p()
    }
}

impl Loss {
    pub fn cost(self, out: &[f64], y: &[f64]) -> f64 {
        match self {
            Loss::Mse => 0.5 * out.iter().zip(y).map(|(f, t)| (f - t) * (f - t)).sum::<f64>(),
            Loss::Bce => out.iter().zip(y).map(|(&f, &t)| t * softplus(-f) + (1.0 - t) * softplus(f)).sum(),
        }
    }

    /// `∂L/∂f_a`.
    pub fn output_grad(self, out: &[f64], y: &[f64]) -> Vec<f64> {
        match self {
            Loss::Mse => out.iter().zip(y).map(|(f, t)| f - t).collect(),
            Loss::Bce => out.iter().zip(y).map(|(&f, t)| sigmoid(f) - t).collect(),
        }
    }

    pub fn check_labels(self, y: &[f64]) -> Result<()> {
        if self == Loss::Bce && y.iter().any(|&v| v != 0.0 && v != 1.0) {
            return Err(Error::Validation("cross-entropy labels must be 0 or 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Batch {
    Full,
    Size(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainOptions {
    pub loss: Loss,
    pub steps: usize,
    pub batch: Batch,
    /// Seeds minibatch shuffling.
    pub seed: u64,
}

impl TrainOptions {
    pub fn full_batch(loss: Loss, steps: usize) -> Self {
        Self { loss, steps, batch: Batch::Full, seed: 0 }
    }
}

/// Cost per step (index 0 is the initial cost) and optional test metric.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainLog {
    pub cost: Vec<f64>,
    pub test_metric: Vec<Option<f64>>,
}

impl TrainLog {
    pub fn final_cost(&self) -> f64 {
        *self.cost.last().expect("log holds the initial cost")
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut cw = csv::Writer::from_writer(w);
        cw.write_record(["step", "cost", "test_metric"])?;
        for (k, c) in self.cost.iter().enumerate() {
            let t = self.test_metric.get(k).copied().flatten().map(|v| v.to_string()).unwrap_or_default();
            cw.write_record([k.to_string(), c.to_string(), t])?;
        }
        cw.flush()?;
        Ok(())
    }
}

pub type Monitor<'a> = dyn FnMut(usize, &NetworkState) -> Option<f64> + 'a;

/// Trains `state` on rows of `xs` with labels `ys`.
pub fn train(state: &mut NetworkState, xs: &DMatrix<f64>, ys: &[f64], opt: &mut Optimizer, options: &TrainOptions) -> Result<TrainLog> {
    train_monitored(state, xs, ys, opt, options, &mut |_, _| None)
}

/// As [`train`], calling `monitor` before each step and after the last.
pub fn train_monitored(
    state: &mut NetworkState,
    xs: &DMatrix<f64>,
    ys: &[f64],
    opt: &mut Optimizer,
    options: &TrainOptions,
    monitor: &mut Monitor<'_>,
) -> Result<TrainLog> {
    let n = xs.nrows();
    if n == 0 {
        return Err(Error::Argument("empty training set".into()));
    }
    if ys.len() != n {
        return Err(Error::Shape(format!("{n} inputs but {} labels", ys.len())));
    }
    options.loss.check_labels(ys)?;
    if let Batch::Size(0) = options.batch {
        return Err(Error::Argument("batch size must be positive".into()));
    }
    let loss = options.loss;
    let mut log = TrainLog::default();
    let mut params = state.params();
    let mut order: Vec<usize> = (0..n).collect();
    let mut cursor = n;
    let mut epoch = 0u64;
    let record = |log: &mut TrainLog, step: usize, cost: f64| -> Result<()> {
        if !cost.is_finite() {
            return Err(Error::Divergence { step, msg: format!("cost became {cost}") });
        }
        log.cost.push(cost);
        Ok(())
    };
    for step in 0..options.steps {
        log.test_metric.push(monitor(step, state));
        let grad = match options.batch {
            Batch::Size(b) if b < n => {
                record(&mut log, step, loss.cost(&state.forward_batch(xs)?, ys))?;
                if cursor + b > n {
                    order.shuffle(&mut rng::substream(options.seed, &[0x4550_4F43, epoch]));
                    epoch += 1;
                    cursor = 0;
                }
                let idx = &order[cursor..cursor + b];
                cursor += b;
                let sub = xs.select_rows(idx);
                let sub_y: Vec<f64> = idx.iter().map(|&i| ys[i]).collect();
                state.weighted_gradient(&sub, |out| loss.output_grad(out, &sub_y))?.1
            }
            _ => {
                let (out, g) = state.weighted_gradient(xs, |out| loss.output_grad(out, ys))?;
                record(&mut log, step, loss.cost(&out, ys))?;
                g
            }
        };
        if grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::Divergence { step, msg: "non-finite gradient".into() });
        }
        opt.step(&mut params, &grad)?;
        state.set_params(&params)?;
    }
    log.test_metric.push(monitor(options.steps, state));
    record(&mut log, options.steps, loss.cost(&state.forward_batch(xs)?, ys))?;
    Ok(log)
}
