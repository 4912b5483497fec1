use super::{label_from_probability, loss_for, output_for};
use crate::data::{Dataset, Task};
use crate::error::Result;
use crate::nn::{train, Activation, Batch, InitScheme, NetworkConfig, NetworkState, Optimizer, TrainLog, TrainOptions};

/// Three-layer network `n → n_0 → 1` on raw inputs. Regression uses a
/// sigmoid hidden layer and identity output; classification uses ReLU and
/// a sigmoid output.
#[derive(Debug, Clone)]
pub struct CnnModel {
    pub net: NetworkState,
    pub task: Task,
}

impl CnnModel {
    pub fn new(n: usize, n0: usize, task: Task, xi: f64, init: InitScheme, seed: u64) -> Result<Self> {
        let hidden = match task {
            Task::Regression => Activation::Sigmoid,
            Task::Classification => Activation::Relu,
        };
        let cfg = NetworkConfig::new(vec![n, n0, 1], xi, hidden)?.with_output(output_for(task)).with_init(init);
        Ok(Self { net: NetworkState::init(cfg, seed)?, task })
    }

    /// `(n + 2) n_0`: everything except the output bias.
    pub fn num_params(&self) -> usize {
        self.net.num_params() - 1
    }

    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        self.net.predict(x)
    }

    pub fn predict_batch(&self, xs: &[Vec<f64>]) -> Result<Vec<f64>> {
        xs.iter().map(|x| self.predict(x)).collect()
    }

    pub fn classify(&self, x: &[f64]) -> Result<f64> {
        Ok(label_from_probability(self.predict(x)?))
    }

    pub fn train(&mut self, data: &Dataset, opt: &mut Optimizer, steps: usize, batch: Batch) -> Result<TrainLog> {
        let options = TrainOptions { loss: loss_for(self.task), steps, batch, seed: self.net.seed };
        train(&mut self.net, &data.input_matrix(), &data.labels, opt, &options)
    }
}
