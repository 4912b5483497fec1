use nalgebra::DMatrix;

use super::gram::{KernelKind, KernelMatrix, KernelMeta};
use crate::error::Result;
use crate::nn::NetworkState;

/// Finite-width tangent kernel `Σ_p ∂f(x)/∂θ_p · ∂f(x′)/∂θ_p` over rows of `xs`.
pub fn empirical_ntk(network: &NetworkState, xs: &DMatrix<f64>) -> Result<KernelMatrix> {
    let j = network.jacobian(xs)?;
    let entries = &j * j.transpose();
    let cfg = &network.config;
    let meta = KernelMeta {
        layers: cfg.depth(),
        xi: cfg.xi,
        activation: cfg.hidden.first().map(|a| a.name()).unwrap_or("identity").to_string(),
        encoder_hash: None,
    };
    Ok(KernelMatrix::new(KernelKind::Empirical, entries, meta))
}

/// Cross block of the finite-width tangent kernel.
pub fn empirical_ntk_cross(network: &NetworkState, rows: &DMatrix<f64>, cols: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    Ok(network.jacobian(rows)? * network.jacobian(cols)?.transpose())
}
