use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use super::state::Statevector;
use crate::error::{Error, Result};

/// Reduced density matrix of an `m`-qubit window.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    m: usize,
    entries: DMatrix<C64>,
}

impl DensityMatrix {
    pub fn from_matrix(entries: DMatrix<C64>) -> Result<Self> {
        let dim = entries.nrows();
        if dim != entries.ncols() || dim < 2 || !dim.is_power_of_two() {
            return Err(Error::Shape(format!("density matrix {}x{} is not 2^m square", dim, entries.ncols())));
        }
        Ok(Self { m: dim.trailing_zeros() as usize, entries })
    }

    pub fn maximally_mixed(m: usize) -> Self {
        let dim = 1usize << m;
        Self { m, entries: DMatrix::identity(dim, dim) / C64::new(dim as f64, 0.0) }
    }

    pub fn num_qubits(&self) -> usize {
        self.m
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.entries
    }

    pub fn trace(&self) -> C64 {
        self.entries.trace()
    }

    pub fn purity(&self) -> f64 {
        trace_product_raw(&self.entries, &self.entries)
    }
}

/// Reduced state of window `k` (1-based), i.e. qubits `(k-1)m .. km-1`.
pub fn reduced_density(state: &Statevector, k: usize, m: usize) -> Result<DensityMatrix> {
    let n = state.num_qubits();
    if m == 0 || !n.is_multiple_of(m) {
        return Err(Error::Index(format!("locality {m} does not divide {n} qubits")));
    }
    if k == 0 || k > n / m {
        return Err(Error::Index(format!("window {k} outside 1..={}", n / m)));
    }
    let first = (k - 1) * m;
    let low = n - first - m;
    let dim = 1usize << m;
    let amps = state.amplitudes();
    let mut rho = DMatrix::<C64>::zeros(dim, dim);
    for h in 0..(1usize << first) {
        for l in 0..(1usize << low) {
            let base = (h << (m + low)) | l;
            for i in 0..dim {
                let ai = amps[base | (i << low)];
                if ai.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..dim {
                    rho[(i, j)] += ai * amps[base | (j << low)].conj();
                }
            }
        }
    }
    Ok(DensityMatrix { m, entries: rho })
}

/// All `n/m` window states of `state`.
pub fn reduced_densities(state: &Statevector, m: usize) -> Result<Vec<DensityMatrix>> {
    let n = state.num_qubits();
    if m == 0 || !n.is_multiple_of(m) {
        return Err(Error::Index(format!("locality {m} does not divide {n} qubits")));
    }
    (1..=n / m).map(|k| reduced_density(state, k, m)).collect()
}

/// `Tr(ρ1 ρ2)`; real for Hermitian inputs.
pub fn trace_product(rho1: &DensityMatrix, rho2: &DensityMatrix) -> Result<f64> {
    if rho1.dim() != rho2.dim() {
        return Err(Error::Shape(format!("trace product of {}- and {}-dim matrices", rho1.dim(), rho2.dim())));
    }
    Ok(trace_product_raw(&rho1.entries, &rho2.entries))
}

pub(crate) fn trace_product_raw(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    let d = a.nrows();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..d {
        for j in 0..d {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc.re
}
