//! Dataset generators, loaders and on-disk formats.

pub mod dataset;
pub mod generators;
pub mod quantum;

pub use dataset::{load_csv_classification, read_classification, split, Dataset, Provenance, Split};
pub use generators::{adhoc_label, gen_adhoc_substitute, gen_hard_sin, gen_sin, hard_sin_target, sin_features, SIN_NOISE_SD};
pub use quantum::{gen_quantum_data, target_values, ObservableForm, QuantumData, QuantumDataConfig, Task};
