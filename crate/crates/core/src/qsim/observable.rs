use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::{Binomial, Distribution};

use super::density::{reduced_densities, trace_product_raw, DensityMatrix};
use super::state::Statevector;
use crate::error::{Error, Result};

const HERMITIAN_TOL: f64 = 1e-10;

/// Operators the simulator can measure.
#[derive(Debug, Clone, PartialEq)]
pub enum Observable {
    /// Full `2^n × 2^n` matrix.
    Dense(DMatrix<C64>),
    /// `Σ_k I ⊗ local ⊗ I` with `local` acting on window `k` of `m` qubits.
    WindowSum { m: usize, local: DMatrix<C64> },
    /// Operator diagonal in the computational basis, given by its diagonal.
    Diagonal(Vec<f64>),
}

pub fn pauli_z() -> DMatrix<C64> {
    DMatrix::from_row_slice(2, 2, &[C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(-1.0, 0.0)])
}

/// `σ_z ⊗ I^{⊗(m-1)}`, the default traceless local observable.
pub fn default_local_observable(m: usize) -> DMatrix<C64> {
    let mut op = pauli_z();
    for _ in 1..m {
        op = op.kronecker(&DMatrix::<C64>::identity(2, 2));
    }
    op
}

pub(crate) fn max_abs(op: &DMatrix<C64>) -> f64 {
    op.iter().fold(0.0, |a, z| a.max(z.norm()))
}

pub fn is_hermitian(op: &DMatrix<C64>, tol: f64) -> bool {
    op.is_square() && max_abs(&(op - op.adjoint())) <= tol * max_abs(op).max(1.0)
}

impl Observable {
    /// `σ_z` on qubit `q` of an `n`-qubit register.
    pub fn pauli_z_on(n: usize, q: usize) -> Self {
        let bit = 1usize << (n - 1 - q);
        Observable::Diagonal((0..1usize << n).map(|i| if i & bit == 0 { 1.0 } else { -1.0 }).collect())
    }

    /// `⊗_i (σ_z^{(i)} + 1)/2`, the projector onto `|0…0⟩`.
    pub fn z_projector_product(n: usize) -> Self {
        let mut d = vec![0.0; 1 << n];
        d[0] = 1.0;
        Observable::Diagonal(d)
    }

    /// `Σ_i (σ_z^{(i)} + 1)/2`, the number of qubits found in `|0⟩`.
    pub fn z_projector_sum(n: usize) -> Self {
        Observable::Diagonal((0..1usize << n).map(|i| (n - (i as u32).count_ones() as usize) as f64).collect())
    }

    pub fn window_sum(m: usize, local: DMatrix<C64>) -> Result<Self> {
        if local.nrows() != 1 << m || !local.is_square() {
            return Err(Error::Shape(format!("local observable {}x{} for locality {m}", local.nrows(), local.ncols())));
        }
        Ok(Observable::WindowSum { m, local })
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        match self {
            Observable::Dense(op) => {
                if op.nrows() != 1 << n || !op.is_square() {
                    return Err(Error::Shape(format!("{}x{} observable on {n} qubits", op.nrows(), op.ncols())));
                }
                if !is_hermitian(op, HERMITIAN_TOL) {
                    return Err(Error::Validation("observable is not Hermitian".into()));
                }
            }
            Observable::WindowSum { m, local } => {
                if *m == 0 || !n.is_multiple_of(*m) || local.nrows() != 1 << m {
                    return Err(Error::Shape(format!("locality {m} incompatible with {n} qubits")));
                }
                if !is_hermitian(local, HERMITIAN_TOL) {
                    return Err(Error::Validation("local observable is not Hermitian".into()));
                }
            }
            Observable::Diagonal(d) => {
                if d.len() != 1 << n {
                    return Err(Error::Shape(format!("diagonal of length {} on {n} qubits", d.len())));
                }
            }
        }
        Ok(())
    }

    /// Dense matrix form, for oracles and small registers.
    pub fn to_dense(&self, n: usize) -> Result<DMatrix<C64>> {
        self.validate(n)?;
        Ok(match self {
            Observable::Dense(op) => op.clone(),
            Observable::Diagonal(d) => DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
                d.len(),
                d.iter().map(|&v| C64::new(v, 0.0)),
            )),
            Observable::WindowSum { m, local } => {
                let nq = n / m;
                let dim = 1usize << n;
                let mut total = DMatrix::<C64>::zeros(dim, dim);
                for k in 0..nq {
                    let left = DMatrix::<C64>::identity(1 << (k * m), 1 << (k * m));
                    let right = DMatrix::<C64>::identity(1 << ((nq - k - 1) * m), 1 << ((nq - k - 1) * m));
                    total += left.kronecker(local).kronecker(&right);
                }
                total
            }
        })
    }
}

/// `⟨ψ|O|ψ⟩`.
pub fn expectation(state: &Statevector, obs: &Observable) -> Result<f64> {
    let n = state.num_qubits();
    obs.validate(n)?;
    let amps = state.amplitudes();
    Ok(match obs {
        Observable::Dense(op) => {
            let mut acc = C64::new(0.0, 0.0);
            for i in 0..amps.len() {
                let mut row = C64::new(0.0, 0.0);
                for j in 0..amps.len() {
                    row += op[(i, j)] * amps[j];
                }
                acc += amps[i].conj() * row;
            }
            acc.re
        }
        Observable::Diagonal(d) => amps.iter().zip(d).map(|(a, v)| a.norm_sqr() * v).sum(),
        Observable::WindowSum { m, local } => {
            let rhos = reduced_densities(state, *m)?;
            rhos.iter().map(|rho| trace_product_raw(local, rho.matrix())).sum()
        }
    })
}

/// Draws multinomial counts for `shots` trials via sequential binomials.
pub fn multinomial_counts<R: Rng + ?Sized>(probs: &[f64], shots: u64, rng: &mut R) -> Vec<u64> {
    let mut counts = vec![0u64; probs.len()];
    let mut remaining = shots;
    let mut mass = probs.iter().map(|p| p.max(0.0)).sum::<f64>();
    for (i, &p) in probs.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        let p = p.max(0.0);
        if i + 1 == probs.len() || mass <= 0.0 {
            counts[i] = remaining;
            break;
        }
        let q = (p / mass).clamp(0.0, 1.0);
        let k = Binomial::new(remaining, q).expect("valid binomial").sample(rng);
        counts[i] = k;
        remaining -= k;
        mass -= p;
    }
    counts
}

/// Eigen-decomposition of a Hermitian local observable: eigenvalues and the
/// eigenvectors as columns.
pub(crate) fn local_eigenbasis(local: &DMatrix<C64>) -> (Vec<f64>, DMatrix<C64>) {
    let eig = local.clone().symmetric_eigen();
    (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
}

/// Outcome probabilities of measuring a window state in a given eigenbasis.
pub(crate) fn eigenbasis_probabilities(rho: &DensityMatrix, basis: &DMatrix<C64>) -> Vec<f64> {
    let r = rho.matrix();
    (0..basis.ncols())
        .map(|j| {
            let v = basis.column(j);
            let rv = r * v;
            v.dotc(&rv).re.max(0.0)
        })
        .collect()
}

/// Shot-sampled estimate of `⟨O⟩`. Window sums are measured window by window
/// in the local eigenbasis and the outcomes summed.
pub fn sample_expectation<R: Rng + ?Sized>(state: &Statevector, obs: &Observable, n_shots: u64, rng: &mut R) -> Result<f64> {
    if n_shots == 0 {
        return Err(Error::Argument("n_shots must be positive".into()));
    }
    let n = state.num_qubits();
    obs.validate(n)?;
    match obs {
        Observable::Diagonal(d) => Ok(sample_diagonal(&state.probabilities(), d, n_shots, rng)),
        Observable::Dense(op) => {
            let off = (0..op.nrows())
                .flat_map(|i| (0..op.ncols()).map(move |j| (i, j)))
                .filter(|&(i, j)| i != j)
                .map(|(i, j)| op[(i, j)].norm())
                .fold(0.0, f64::max);
            if off > HERMITIAN_TOL {
                return Err(Error::Validation("dense observable must be diagonal in the computational basis to sample".into()));
            }
            let d: Vec<f64> = (0..op.nrows()).map(|i| op[(i, i)].re).collect();
            Ok(sample_diagonal(&state.probabilities(), &d, n_shots, rng))
        }
        Observable::WindowSum { m, local } => {
            let (values, basis) = local_eigenbasis(local);
            let mut total = 0.0;
            for rho in reduced_densities(state, *m)? {
                let probs = eigenbasis_probabilities(&rho, &basis);
                total += sample_diagonal(&probs, &values, n_shots, rng);
            }
            Ok(total)
        }
    }
}

pub(crate) fn sample_diagonal<R: Rng + ?Sized>(probs: &[f64], values: &[f64], shots: u64, rng: &mut R) -> f64 {
    let counts = multinomial_counts(probs, shots, rng);
    counts.iter().zip(values).map(|(&c, v)| c as f64 * v).sum::<f64>() / shots as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsim::state::{zero_state, Gate};
    use crate::rng;

    #[test]
    fn z_on_basis_and_plus() {
        let s = zero_state(1).unwrap();
        assert_eq!(expectation(&s, &Observable::pauli_z_on(1, 0)).unwrap(), 1.0);
        let mut p = zero_state(1).unwrap();
        p.apply(&Gate::H(0)).unwrap();
        assert!(expectation(&p, &Observable::pauli_z_on(1, 0)).unwrap().abs() < 1e-15);
    }

    #[test]
    fn rejects_non_hermitian() {
        let s = zero_state(1).unwrap();
        let op = DMatrix::from_row_slice(2, 2, &[C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)]);
        assert!(matches!(expectation(&s, &Observable::Dense(op)), Err(Error::Validation(_))));
    }

    #[test]
    fn deterministic_outcome_sampling() {
        let s = zero_state(2).unwrap();
        let mut r = rng::seeded(1);
        for shots in [1, 7, 1000] {
            assert_eq!(sample_expectation(&s, &Observable::pauli_z_on(2, 1), shots, &mut r).unwrap(), 1.0);
        }
        assert!(matches!(sample_expectation(&s, &Observable::pauli_z_on(2, 1), 0, &mut r), Err(Error::Argument(_))));
    }

    #[test]
    fn multinomial_counts_sum_to_shots() {
        let mut r = rng::seeded(2);
        let c = multinomial_counts(&[0.2, 0.0, 0.5, 0.3], 1000, &mut r);
        assert_eq!(c.iter().sum::<u64>(), 1000);
        assert_eq!(c[1], 0);
    }

    #[test]
    fn projector_observables() {
        let s = zero_state(3).unwrap();
        assert_eq!(expectation(&s, &Observable::z_projector_product(3)).unwrap(), 1.0);
        assert_eq!(expectation(&s, &Observable::z_projector_sum(3)).unwrap(), 3.0);
    }

    #[test]
    fn default_local_is_traceless() {
        for m in 1..=3 {
            let o = default_local_observable(m);
            assert!(o.trace().norm() < 1e-15);
            assert!(((&o * &o).trace().re - (1 << m) as f64).abs() < 1e-12);
        }
    }
}
