//! Training dynamics in the fixed-kernel regime.

pub mod bce;
pub mod cost;
pub mod spectral;

pub use bce::{bce_trajectory, default_bce_step};
pub use cost::{advantage_gap, expected_cost, expected_cost_terms, slow_set, CostMode, CostTerms};
pub use spectral::{diagonalize, mse_cost, SpectralModel, Trajectory, ZERO_EIGEN_REL};
