//! Positive-definiteness diagnostics with degeneracy witnesses.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::qsim::DensityMatrix;

pub const DEFAULT_PD_TOL: f64 = 1e-10;
const WITNESS_TOL: f64 = 1e-6;

/// Null-space coefficient vector and which degeneracy conditions it meets.
#[derive(Debug, Clone, PartialEq)]
pub struct DegeneracyWitness {
    pub coefficients: Vec<f64>,
    /// `Σ c_a = 0` and `Σ c_a ρ_a^k = 0` for every window; `None` without states.
    pub condition_i: Option<bool>,
    /// `ξ = 0` and the normalised mixture of each window is maximally mixed.
    pub condition_ii: Option<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PdReport {
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
    pub tol: f64,
    pub is_pd: bool,
    pub witness: Option<DegeneracyWitness>,
}

/// Checks `K` for positive definiteness at `tol · λ_max`. If it is not,
/// the eigenvector of the smallest eigenvalue is returned as a witness and,
/// when window states are supplied, tested against both degeneracy
/// conditions.
pub fn pd_check(k: &DMatrix<f64>, windows: Option<&[Vec<DensityMatrix>]>, xi: f64, tol: f64) -> PdReport {
    let sym = (k + k.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let (mut imin, mut imax) = (0, 0);
    for i in 0..eig.eigenvalues.len() {
        if eig.eigenvalues[i] < eig.eigenvalues[imin] {
            imin = i;
        }
        if eig.eigenvalues[i] > eig.eigenvalues[imax] {
            imax = i;
        }
    }
    let min = eig.eigenvalues.get(imin).copied().unwrap_or(f64::NAN);
    let max = eig.eigenvalues.get(imax).copied().unwrap_or(f64::NAN);
    let is_pd = min > tol * max;
    let witness = (!is_pd && !eig.eigenvalues.is_empty()).then(|| {
        let c: Vec<f64> = eig.eigenvectors.column(imin).iter().copied().collect();
        let (ci, cii) = match windows {
            Some(w) if w.len() == c.len() => (Some(condition_i(&c, w)), Some(condition_ii(&c, w, xi))),
            _ => (None, None),
        };
        DegeneracyWitness { coefficients: c, condition_i: ci, condition_ii: cii }
    });
    PdReport { min_eigenvalue: min, max_eigenvalue: max, tol, is_pd, witness }
}

fn mixture(c: &[f64], windows: &[Vec<DensityMatrix>], k: usize) -> DMatrix<C64> {
    let d = windows[0][k].dim();
    let mut acc = DMatrix::<C64>::zeros(d, d);
    for (ca, w) in c.iter().zip(windows) {
        acc += w[k].matrix() * C64::new(*ca, 0.0);
    }
    acc
}

fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().fold(0.0, |a, z| a.max(z.norm()))
}

pub fn condition_i(c: &[f64], windows: &[Vec<DensityMatrix>]) -> bool {
    let scale = DVector::from_column_slice(c).norm().max(f64::MIN_POSITIVE);
    let sum: f64 = c.iter().sum();
    if sum.abs() > WITNESS_TOL * scale {
        return false;
    }
    (0..windows[0].len()).all(|k| max_abs(&mixture(c, windows, k)) <= WITNESS_TOL * scale)
}

pub fn condition_ii(c: &[f64], windows: &[Vec<DensityMatrix>], xi: f64) -> bool {
    let scale = DVector::from_column_slice(c).norm().max(f64::MIN_POSITIVE);
    let sum: f64 = c.iter().sum();
    if xi != 0.0 || sum.abs() <= WITNESS_TOL * scale {
        return false;
    }
    (0..windows[0].len()).all(|k| {
        let d = windows[0][k].dim();
        let target = DMatrix::<C64>::identity(d, d) * C64::new(sum / d as f64, 0.0);
        max_abs(&(mixture(c, windows, k) - target)) <= WITNESS_TOL * scale
    })
}
