//! Quantum-classical hybrid neural networks in the neural tangent kernel
//! regime.
//!
//! The crate covers the full pipeline: a statevector simulator for the
//! quantum encoder and random-measurement feature map ([`qsim`]), the exact
//! infinite-width covariance and tangent kernels ([`kernel`]), the spectral
//! training-dynamics solvers ([`dynamics`]), finite-width networks in NTK
//! parameterization ([`nn`]), the end-to-end qcNN/qNN/cNN models
//! ([`models`]), and dataset generators ([`data`]).

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod csvio;
pub mod data;
pub mod dynamics;
pub mod error;
pub mod kernel;
pub mod models;
pub mod nn;
pub mod qsim;
pub mod rng;

pub use error::{Error, Result};
