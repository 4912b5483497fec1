//! Haar-random unitaries. Haar measure is an exact unitary 2-design, so it
//! reproduces every second-moment identity the covariance formulas rely on.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::StandardNormal;

/// Haar-distributed `d × d` unitary.
///
/// Columns of a complex Ginibre matrix are orthonormalized by Gram–Schmidt,
/// which yields an `R` factor with positive real diagonal and hence exactly
/// Haar-distributed `Q`.
pub fn haar_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> DMatrix<C64> {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let mut q = DMatrix::<C64>::from_fn(d, d, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re * scale, im * scale)
    });
    for j in 0..d {
        // two passes of modified Gram-Schmidt keep orthogonality at machine precision
        for _ in 0..2 {
            for k in 0..j {
                let proj: C64 = (0..d).map(|i| q[(i, k)].conj() * q[(i, j)]).sum();
                for i in 0..d {
                    let v = q[(i, k)];
                    q[(i, j)] -= proj * v;
                }
            }
        }
        let norm = (0..d).map(|i| q[(i, j)].norm_sqr()).sum::<f64>().sqrt();
        for i in 0..d {
            q[(i, j)] /= norm;
        }
    }
    q
}

/// `n_q` independent Haar unitaries on `m` qubits each: one factor of
/// `U = U^1 ⊗ … ⊗ U^{n_q}`.
pub fn sample_product_2design<R: Rng + ?Sized>(m: usize, n_q: usize, rng: &mut R) -> Vec<DMatrix<C64>> {
    assert!(m >= 1, "locality must be at least 1");
    (0..n_q).map(|_| haar_unitary(1 << m, rng)).collect()
}

pub fn unitarity_error(u: &DMatrix<C64>) -> f64 {
    let id = DMatrix::<C64>::identity(u.nrows(), u.ncols());
    super::observable::max_abs(&(u.adjoint() * u - id))
}
