//! Small-scale statevector simulation: gates, encoders, window states,
//! Haar sampling, observables, shot sampling and random-measurement features.

pub mod density;
pub mod encoder;
pub mod features;
pub mod haar;
pub mod observable;
pub mod state;

pub use density::{reduced_densities, reduced_density, trace_product, DensityMatrix};
pub use encoder::{compile_encoder, Ansatz, EncoderSpec};
pub use features::{feature_matrix, quantum_features, window_states, RandomMeasurement, Shots};
pub use haar::{haar_unitary, sample_product_2design};
pub use observable::{default_local_observable, expectation, sample_expectation, Observable};
pub use state::{zero_state, Gate, Statevector, MAX_QUBITS};
