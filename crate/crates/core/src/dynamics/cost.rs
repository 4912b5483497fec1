//! Expected mean-squared cost at a stopping time, averaged over the
//! Gaussian initial outputs, and the classical-minus-quantum gap.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::spectral::SpectralModel;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CostMode {
    /// `e^{−ηλτ}` replaced by 1 on `{λ < 1/(ητ)}` and 0 elsewhere.
    HardStep,
    /// True decay factor `e^{−2ηλτ}` on every mode.
    Exact,
}

/// The two contributions to the expected cost.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostTerms {
    /// From the initial-output covariance.
    pub init: f64,
    /// From the label projections.
    pub label: f64,
}

impl CostTerms {
    pub fn total(&self) -> f64 {
        self.init + self.label
    }
}

/// Indices of the slow set `{j : λ_j < 1/(ητ)}`.
pub fn slow_set(model: &SpectralModel, eta: f64, tau: f64) -> Vec<usize> {
    let cut = 1.0 / (eta * tau);
    (0..model.len()).filter(|&j| model.eigenvalues[j] < cut).collect()
}

/// Expected `(1/N_D) Σ_a (f_τ(x^a) − y^a)²` with `f_0 ~ N(0, cov)`.
pub fn expected_cost_terms(model: &SpectralModel, cov: &DMatrix<f64>, eta: f64, tau: f64, mode: CostMode) -> Result<CostTerms> {
    let n = model.len();
    if cov.shape() != (n, n) {
        return Err(Error::Shape(format!("covariance is {}x{}, kernel has {n} points", cov.nrows(), cov.ncols())));
    }
    if !(eta > 0.0) || !(tau >= 0.0) {
        return Err(Error::Argument("learning rate must be positive and stopping time non-negative".into()));
    }
    let g = model.label_projection();
    let cut = 1.0 / (eta * tau);
    let mut terms = CostTerms { init: 0.0, label: 0.0 };
    for (j, &l) in model.eigenvalues.iter().enumerate().take(n) {
        let factor = match mode {
            CostMode::HardStep => {
                if l < cut {
                    1.0
                } else {
                    0.0
                }
            }
            CostMode::Exact => (-2.0 * eta * l * tau).exp(),
        };
        if factor == 0.0 {
            continue;
        }
        let vj = DVector::from_iterator(n, model.v.row(j).iter().copied());
        terms.init += factor * vj.dot(&(cov * &vj));
        terms.label += factor * g[j] * g[j];
    }
    terms.init /= n as f64;
    terms.label /= n as f64;
    Ok(terms)
}

pub fn expected_cost(model: &SpectralModel, cov: &DMatrix<f64>, eta: f64, tau: f64, mode: CostMode) -> Result<f64> {
    Ok(expected_cost_terms(model, cov, eta, tau, mode)?.total())
}

/// Classical expected cost minus quantum expected cost; positive favours
/// the quantum model.
pub fn advantage_gap(
    classical: (&SpectralModel, &DMatrix<f64>),
    quantum: (&SpectralModel, &DMatrix<f64>),
    eta: f64,
    tau: f64,
    mode: CostMode,
) -> Result<f64> {
    if classical.0.labels != quantum.0.labels {
        return Err(Error::Shape("classical and quantum models use different labels".into()));
    }
    Ok(expected_cost(classical.0, classical.1, eta, tau, mode)? - expected_cost(quantum.0, quantum.1, eta, tau, mode)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::diagonalize;

    fn model() -> (SpectralModel, DMatrix<f64>) {
        let k = DMatrix::from_row_slice(3, 3, &[2.0, 0.5, 0.1, 0.5, 1.5, 0.2, 0.1, 0.2, 1.0]);
        let cov = DMatrix::from_row_slice(3, 3, &[1.0, 0.3, 0.0, 0.3, 1.0, 0.1, 0.0, 0.1, 0.5]);
        (diagonalize(&k, &[1.0, -0.5, 0.25], &[0.0; 3]).unwrap(), cov)
    }

    #[test]
    fn late_stop_has_empty_slow_set() {
        let (m, cov) = model();
        assert_eq!(expected_cost(&m, &cov, 1.0, 1e9, CostMode::HardStep).unwrap(), 0.0);
    }

    #[test]
    fn early_stop_keeps_everything() {
        let (m, cov) = model();
        let want = (cov.trace() + 1.0 + 0.25 + 0.0625) / 3.0;
        assert!((expected_cost(&m, &cov, 1.0, 1e-12, CostMode::HardStep).unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn gap_of_identical_sides_is_zero() {
        let (m, cov) = model();
        assert_eq!(advantage_gap((&m, &cov), (&m, &cov), 0.1, 3.0, CostMode::HardStep).unwrap(), 0.0);
    }
}
