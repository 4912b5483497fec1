//! Finite-width networks in NTK parameterization and their training.

pub mod activation;
pub mod network;
pub mod optim;
pub mod train;

pub use activation::{sigmoid, Activation};
pub use network::{InitScheme, NetworkConfig, NetworkState};
pub use optim::{Optimizer, OptimizerKind};
pub use train::{train, train_monitored, Batch, Loss, TrainLog, TrainOptions};
