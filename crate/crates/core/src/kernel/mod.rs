//! Infinite-width kernels, finite-width tangent kernels and Gram diagnostics.

pub mod analytic;
pub mod empirical;
pub mod gram;
pub mod pd;
pub mod recursion;

pub use analytic::{
    mc_gaussian_expectation, projected_kernel, projected_kernel_xi, quantum_prefactor, relu_next_sigma, relu_sigma_dot,
    sigma_classical_1, sigma_q_1, sigma_q_1_windows, McEstimate, Welford,
};
pub use empirical::{empirical_ntk, empirical_ntk_cross};
pub use gram::{cross_gram, gram, KernelKind, KernelMatrix, KernelMeta};
pub use pd::{pd_check, DegeneracyWitness, PdReport, DEFAULT_PD_TOL};
pub use recursion::{layer_step, quantum_first_layer, theta_from_layers, theta_recursion, theta_recursion_cross, InputKind, KernelConfig, LayerKernels};
