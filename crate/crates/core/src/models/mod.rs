//! End-to-end learning models: the hybrid qcNN, the variational qNN and a
//! plain classical network.

pub mod cnn;
pub mod compare;
pub mod qcnn;
pub mod qnn;

pub use cnn::CnnModel;
pub use compare::{compare_models, CompareConfig, CompareReport, ModelKind, ReportRow, SummaryRow};
pub use qcnn::{QcnnModel, QcnnTraining};
pub use qnn::QnnModel;

use crate::data::Task;
use crate::nn::{Activation, Loss};

/// Ties at exactly 0.5 go to class 1.
pub fn label_from_probability(p: f64) -> f64 {
    if p >= 0.5 {
        1.0
    } else {
        0.0
    }
}

pub fn rmse(pred: &[f64], y: &[f64]) -> f64 {
    (pred.iter().zip(y).map(|(p, t)| (p - t) * (p - t)).sum::<f64>() / y.len() as f64).sqrt()
}

/// Fraction of thresholded probabilities equal to the labels.
pub fn accuracy(prob: &[f64], y: &[f64]) -> f64 {
    prob.iter().zip(y).filter(|(p, t)| label_from_probability(**p) == **t).count() as f64 / y.len() as f64
}

pub(crate) fn loss_for(task: Task) -> Loss {
    match task {
        Task::Regression => Loss::Mse,
        Task::Classification => Loss::Bce,
    }
}

pub(crate) fn output_for(task: Task) -> Activation {
    match task {
        Task::Regression => Activation::Identity,
        Task::Classification => Activation::Sigmoid,
    }
}
