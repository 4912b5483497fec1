//! Random-measurement feature extraction `f^Q_i(x) = ⟨ψ(x)|U_i† O U_i|ψ(x)⟩`.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::Rng;
use rayon::prelude::*;

use super::density::{reduced_densities, trace_product_raw, DensityMatrix};
use super::encoder::EncoderSpec;
use super::haar::sample_product_2design;
use super::observable::{default_local_observable, eigenbasis_probabilities, is_hermitian, local_eigenbasis, sample_diagonal};
use crate::error::{Error, Result};
use crate::rng;

/// `n_0` frozen product unitaries plus the local observable they rotate.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomMeasurement {
    n: usize,
    m: usize,
    unitaries: Vec<Vec<DMatrix<C64>>>,
    local: DMatrix<C64>,
    // U^k_i† 𝒪 U^k_i, cached
    rotated: Vec<Vec<DMatrix<C64>>>,
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<C64>,
}

impl RandomMeasurement {
    /// Samples `n0` product unitaries with locality `m` on `n` qubits. Unitary
    /// `i` is drawn from its own substream of `seed`.
    pub fn sample(n: usize, m: usize, n0: usize, local: Option<DMatrix<C64>>, seed: u64) -> Result<Self> {
        if m == 0 || !n.is_multiple_of(m) {
            return Err(Error::Shape(format!("locality {m} does not divide {n} qubits")));
        }
        let n_q = n / m;
        let unitaries: Vec<Vec<DMatrix<C64>>> = (0..n0)
            .into_par_iter()
            .map(|i| sample_product_2design(m, n_q, &mut rng::substream(seed, &[0x554E_4954, i as u64])))
            .collect();
        Self::from_unitaries(n, m, unitaries, local.unwrap_or_else(|| default_local_observable(m)))
    }

    pub fn from_unitaries(n: usize, m: usize, unitaries: Vec<Vec<DMatrix<C64>>>, local: DMatrix<C64>) -> Result<Self> {
        if m == 0 || !n.is_multiple_of(m) {
            return Err(Error::Shape(format!("locality {m} does not divide {n} qubits")));
        }
        let dim = 1usize << m;
        if local.nrows() != dim || !local.is_square() {
            return Err(Error::Shape(format!("local observable must be {dim}x{dim}")));
        }
        if !is_hermitian(&local, 1e-12) || local.trace().norm() > 1e-12 {
            return Err(Error::Validation("local observable must be Hermitian and traceless".into()));
        }
        for row in &unitaries {
            if row.len() != n / m || row.iter().any(|u| u.nrows() != dim || u.ncols() != dim) {
                return Err(Error::Shape("unitary list does not match windows".into()));
            }
        }
        let rotated = unitaries
            .iter()
            .map(|row| row.iter().map(|u| u.adjoint() * &local * u).collect())
            .collect();
        let (eigenvalues, eigenvectors) = local_eigenbasis(&local);
        Ok(Self { n, m, unitaries, local, rotated, eigenvalues, eigenvectors })
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn locality(&self) -> usize {
        self.m
    }

    pub fn windows(&self) -> usize {
        self.n / self.m
    }

    /// Number of product unitaries, i.e. the feature dimension `n_0`.
    pub fn len(&self) -> usize {
        self.unitaries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.unitaries.is_empty()
    }

    pub fn unitaries(&self) -> &[Vec<DMatrix<C64>>] {
        &self.unitaries
    }

    pub fn local_observable(&self) -> &DMatrix<C64> {
        &self.local
    }

    /// `Tr(𝒪²)`.
    pub fn local_trace_sq(&self) -> f64 {
        trace_product_raw(&self.local, &self.local)
    }

    /// Operator norm of the local observable.
    pub fn local_norm(&self) -> f64 {
        self.eigenvalues.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    /// Exact features from precomputed window states.
    pub fn features_from_windows(&self, rhos: &[DensityMatrix]) -> Result<Vec<f64>> {
        self.check_windows(rhos)?;
        Ok(self
            .rotated
            .iter()
            .map(|row| row.iter().zip(rhos).map(|(a, rho)| trace_product_raw(a, rho.matrix())).sum())
            .collect())
    }

    /// Shot-sampled features: each window of each unitary is measured
    /// `n_shots` times in the rotated eigenbasis of `𝒪`.
    pub fn sampled_features_from_windows<R: Rng + ?Sized>(&self, rhos: &[DensityMatrix], n_shots: u64, rng: &mut R) -> Result<Vec<f64>> {
        if n_shots == 0 {
            return Err(Error::Argument("n_shots must be positive".into()));
        }
        self.check_windows(rhos)?;
        Ok(self
            .unitaries
            .iter()
            .map(|row| {
                row.iter()
                    .zip(rhos)
                    .map(|(u, rho)| {
                        let basis = u.adjoint() * &self.eigenvectors;
                        let probs = eigenbasis_probabilities(rho, &basis);
                        sample_diagonal(&probs, &self.eigenvalues, n_shots, rng)
                    })
                    .sum()
            })
            .collect())
    }

    fn check_windows(&self, rhos: &[DensityMatrix]) -> Result<()> {
        if rhos.len() != self.windows() || rhos.iter().any(|r| r.num_qubits() != self.m) {
            return Err(Error::Shape(format!(
                "expected {} windows of {} qubits, got {}",
                self.windows(),
                self.m,
                rhos.len()
            )));
        }
        Ok(())
    }
}

/// Shot-noise settings for feature extraction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Shots {
    pub n_shots: u64,
    pub seed: u64,
}

/// Feature vector of one input. `shots = None` gives exact expectations.
pub fn quantum_features(x: &[f64], spec: &EncoderSpec, meas: &RandomMeasurement, shots: Option<(u64, &mut rng::Rng)>) -> Result<Vec<f64>> {
    if spec.n != meas.num_qubits() {
        return Err(Error::Shape(format!("encoder has {} qubits, measurement {}", spec.n, meas.num_qubits())));
    }
    let state = spec.encode(x)?;
    let rhos = reduced_densities(&state, meas.locality())?;
    match shots {
        None => meas.features_from_windows(&rhos),
        Some((n, r)) => meas.sampled_features_from_windows(&rhos, n, r),
    }
}

/// Features of a batch, one row per input. With shots, row `a` draws from
/// substream `(seed, a)` so the matrix does not depend on thread scheduling.
pub fn feature_matrix(xs: &[Vec<f64>], spec: &EncoderSpec, meas: &RandomMeasurement, shots: Option<Shots>) -> Result<DMatrix<f64>> {
    let rows: Vec<Vec<f64>> = xs
        .par_iter()
        .enumerate()
        .map(|(a, x)| match shots {
            None => quantum_features(x, spec, meas, None),
            Some(s) => {
                let mut r = rng::substream(s.seed, &[0x5348_4F54, a as u64]);
                quantum_features(x, spec, meas, Some((s.n_shots, &mut r)))
            }
        })
        .collect::<Result<_>>()?;
    let n0 = meas.len();
    Ok(DMatrix::from_fn(xs.len(), n0, |a, i| rows[a][i]))
}

/// Window states for a batch of inputs.
pub fn window_states(xs: &[Vec<f64>], spec: &EncoderSpec, m: usize) -> Result<Vec<Vec<DensityMatrix>>> {
    xs.par_iter().map(|x| reduced_densities(&spec.encode(x)?, m)).collect()
}

/// Writes a feature matrix as CSV: header `f1..fn0`, one row per input.
pub fn write_feature_csv<W: std::io::Write>(w: W, features: &DMatrix<f64>) -> Result<()> {
    let header: Vec<String> = (1..=features.ncols()).map(|i| format!("f{i}")).collect();
    crate::csvio::write_matrix(w, Some(&header), features)
}
