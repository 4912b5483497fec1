//! Closed-form kernel entries and the Gaussian Monte-Carlo estimator used
//! for activations without a closed form.

use rand::Rng;
use rand_distr::StandardNormal;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::qsim::density::{trace_product_raw, DensityMatrix};
use crate::qsim::encoder::EncoderSpec;
use crate::qsim::reduced_densities;

/// First-layer covariance of a classical network, `xᵀx′/n_0 + ξ²`.
pub fn sigma_classical_1(x: &[f64], y: &[f64], n0: usize, xi: f64) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::Shape(format!("inputs of length {} and {}", x.len(), y.len())));
    }
    if n0 == 0 {
        return Err(Error::Argument("n0 must be positive".into()));
    }
    let dot: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    Ok(dot / n0 as f64 + xi * xi)
}

/// Prefactor `Tr(𝒪²)/(2^{2m}-1)` of the quantum covariance.
pub fn quantum_prefactor(trace_o_sq: f64, m: usize) -> f64 {
    trace_o_sq / ((1u64 << (2 * m)) as f64 - 1.0)
}

/// Bias coefficient that turns the first-layer quantum covariance into the
/// bare projected quantum kernel.
pub fn projected_kernel_xi(n_q: usize, trace_o_sq: f64, m: usize) -> f64 {
    (n_q as f64 * trace_o_sq / (((1u64 << (2 * m)) as f64 - 1.0) * (1u64 << m) as f64)).sqrt()
}

/// `Σ_k Tr(ρ_x^k ρ_{x'}^k)`.
pub fn projected_kernel(rx: &[DensityMatrix], ry: &[DensityMatrix]) -> Result<f64> {
    if rx.len() != ry.len() {
        return Err(Error::Shape(format!("{} vs {} windows", rx.len(), ry.len())));
    }
    let mut acc = 0.0;
    for (a, b) in rx.iter().zip(ry) {
        if a.dim() != b.dim() {
            return Err(Error::Shape("window dimensions differ".into()));
        }
        acc += trace_product_raw(a.matrix(), b.matrix());
    }
    Ok(acc)
}

/// First-layer quantum covariance from window states:
/// `Tr(𝒪²)/(2^{2m}-1) · Σ_k (Tr(ρ_x^k ρ_{x'}^k) − 2^{-m}) + ξ²`.
pub fn sigma_q_1_windows(rx: &[DensityMatrix], ry: &[DensityMatrix], trace_o_sq: f64, xi: f64) -> Result<f64> {
    let m = rx.first().map(DensityMatrix::num_qubits).ok_or_else(|| Error::Shape("no windows".into()))?;
    let pk = projected_kernel(rx, ry)?;
    let offset = rx.len() as f64 / (1u64 << m) as f64;
    Ok(quantum_prefactor(trace_o_sq, m) * (pk - offset) + xi * xi)
}

/// First-layer quantum covariance of two raw inputs.
pub fn sigma_q_1(x: &[f64], y: &[f64], spec: &EncoderSpec, m: usize, trace_o_sq: f64, xi: f64) -> Result<f64> {
    if m == 0 || !spec.n.is_multiple_of(m) {
        return Err(Error::Shape(format!("locality {m} does not divide {} qubits", spec.n)));
    }
    let rx = reduced_densities(&spec.encode(x)?, m)?;
    let ry = reduced_densities(&spec.encode(y)?, m)?;
    sigma_q_1_windows(&rx, &ry, trace_o_sq, xi)
}

fn relu_angle(kxx: f64, kxy: f64, kyy: f64) -> Result<(f64, f64)> {
    if !(kxx > 0.0 && kyy > 0.0) {
        return Err(Error::Domain(format!("non-positive diagonal ({kxx}, {kyy})")));
    }
    let norm = (kxx * kyy).sqrt();
    if kxy.abs() > norm * (1.0 + 1e-10) {
        return Err(Error::Domain(format!("|K_xy| = {} exceeds sqrt(K_xx K_yy) = {norm}", kxy.abs())));
    }
    Ok(((kxy / norm).clamp(-1.0, 1.0).acos(), norm))
}

/// Arc-cosine step `E[ReLU(h)ReLU(h′)] + ξ²` for `h ~ N(0, K)`.
pub fn relu_next_sigma(kxx: f64, kxy: f64, kyy: f64, xi: f64) -> Result<f64> {
    let (theta, norm) = relu_angle(kxx, kxy, kyy)?;
    Ok(norm * (theta.sin() + (PI - theta) * theta.cos()) / (2.0 * PI) + xi * xi)
}

/// `E[1_{h>0} 1_{h′>0}] = (π − θ)/(2π)`.
pub fn relu_sigma_dot(kxx: f64, kxy: f64, kyy: f64) -> Result<f64> {
    let (theta, _) = relu_angle(kxx, kxy, kyy)?;
    Ok((PI - theta) / (2.0 * PI))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub std_err: f64,
}

impl McEstimate {
    /// `|value − mean|` in units of the standard error.
    pub fn z_score(&self, value: f64) -> f64 {
        if self.std_err == 0.0 {
            if value == self.mean {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            (value - self.mean).abs() / self.std_err
        }
    }
}

/// Running mean/variance accumulator.
#[derive(Debug, Default, Clone, Copy)]
pub struct Welford {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Welford {
    pub fn push(&mut self, v: f64) {
        self.n += 1;
        let d = v - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (v - self.mean);
    }

    pub fn estimate(&self) -> McEstimate {
        let var = if self.n > 1 { self.m2 / (self.n - 1) as f64 } else { 0.0 };
        McEstimate { mean: self.mean, std_err: (var / self.n.max(1) as f64).sqrt() }
    }
}

/// Monte-Carlo estimate of `E[g(h, h′)]` for `(h, h′) ~ N(0, cov)`.
pub fn mc_gaussian_expectation<R, G>(cov: [[f64; 2]; 2], g: G, samples: usize, rng: &mut R) -> Result<McEstimate>
where
    R: Rng + ?Sized,
    G: Fn(f64, f64) -> f64,
{
    let [[a, b], [b2, c]] = cov;
    let scale = a.abs().max(c.abs()).max(1e-300);
    if (b - b2).abs() > 1e-12 * scale {
        return Err(Error::Domain("covariance is not symmetric".into()));
    }
    if a < 0.0 || c < 0.0 || a * c - b * b < -1e-12 * scale * scale {
        return Err(Error::Domain(format!("covariance [[{a}, {b}], [{b}, {c}]] is not positive semi-definite")));
    }
    if samples == 0 {
        return Err(Error::Argument("samples must be positive".into()));
    }
    // Cholesky with a rank-deficient fallback
    let l11 = a.sqrt();
    let (l21, l22) = if l11 > 0.0 {
        let l21 = b / l11;
        (l21, (c - l21 * l21).max(0.0).sqrt())
    } else {
        (0.0, c.sqrt())
    };
    let mut acc = Welford::default();
    for _ in 0..samples {
        let z1: f64 = rng.sample(StandardNormal);
        let z2: f64 = rng.sample(StandardNormal);
        acc.push(g(l11 * z1, l21 * z1 + l22 * z2));
    }
    Ok(acc.estimate())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    #[test]
    fn classical_first_layer() {
        assert_eq!(sigma_classical_1(&[0.0, 0.0], &[0.0, 0.0], 2, 1.0).unwrap(), 1.0);
        let x = [1.0, -1.0, 1.0];
        assert!((sigma_classical_1(&x, &x, 3, 0.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(matches!(sigma_classical_1(&[1.0], &[1.0, 2.0], 1, 0.0), Err(Error::Shape(_))));
    }

    #[test]
    fn relu_closed_form_limits() {
        let k = 2.3;
        assert!((relu_next_sigma(k, k, k, 0.5).unwrap() - (k / 2.0 + 0.25)).abs() < 1e-14);
        let (a, c) = (1.5f64, 0.7);
        let want = (a * c).sqrt() / (2.0 * PI) + 0.04;
        assert!((relu_next_sigma(a, 0.0, c, 0.2).unwrap() - want).abs() < 1e-14);
        assert!((relu_sigma_dot(k, k, k).unwrap() - 0.5).abs() < 1e-15);
        assert!(relu_sigma_dot(k, -k, k).unwrap().abs() < 1e-15);
    }

    #[test]
    fn relu_domain_errors() {
        assert!(matches!(relu_next_sigma(0.0, 0.0, 1.0, 0.0), Err(Error::Domain(_))));
        assert!(matches!(relu_sigma_dot(1.0, 1.5, 1.0), Err(Error::Domain(_))));
        // tolerance band for rounding
        assert!(relu_sigma_dot(1.0, 1.0 + 1e-12, 1.0).is_ok());
    }

    #[test]
    fn mc_identity_pair_is_uncorrelated() {
        let est = mc_gaussian_expectation([[1.0, 0.0], [0.0, 1.0]], |a, b| a * b, 100_000, &mut rng::seeded(1)).unwrap();
        assert!(est.z_score(0.0) < 3.0);
    }

    #[test]
    fn mc_relu_pair_matches_closed_form() {
        let relu = |v: f64| v.max(0.0);
        let est = mc_gaussian_expectation([[1.0, 0.0], [0.0, 1.0]], |a, b| relu(a) * relu(b), 200_000, &mut rng::seeded(2)).unwrap();
        assert!(est.z_score(1.0 / (2.0 * PI)) < 3.0);
    }

    #[test]
    fn mc_rank_one_half_gaussian_moment() {
        let k = 1.7;
        let relu = |v: f64| v.max(0.0);
        let est = mc_gaussian_expectation([[k, k], [k, k]], |a, b| relu(a) * relu(b), 200_000, &mut rng::seeded(3)).unwrap();
        assert!(est.z_score(k / 2.0) < 3.0);
    }

    #[test]
    fn mc_rejects_non_psd() {
        let r = mc_gaussian_expectation([[1.0, 2.0], [2.0, 1.0]], |a, _| a, 10, &mut rng::seeded(0));
        assert!(matches!(r, Err(Error::Domain(_))));
    }

    #[test]
    fn corollary_xi_value() {
        // m = 1, σ_z: Tr(𝒪²) = 2, n_Q = 2 → ξ² = 2·2/(3·2)
        let xi = projected_kernel_xi(2, 2.0, 1);
        assert!((xi * xi - 2.0 / 3.0).abs() < 1e-15);
    }
}
