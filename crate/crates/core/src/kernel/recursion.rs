//! Layer-by-layer covariance and tangent-kernel recursion.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::analytic::{mc_gaussian_expectation, relu_next_sigma, relu_sigma_dot, sigma_classical_1, sigma_q_1_windows};
use super::gram::gram;
use crate::error::{Error, Result};
use crate::nn::Activation;
use crate::qsim::{DensityMatrix, EncoderSpec};
use crate::rng;

pub const DEFAULT_MC_SAMPLES: usize = 1_000_000;

/// How first-layer covariances are formed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum InputKind {
    Classical { n0: usize },
    /// Quantum features with locality `m`; `trace_o_sq` is `Tr(𝒪²)`.
    Quantum { m: usize, trace_o_sq: f64, encoder: EncoderSpec },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelConfig {
    pub layers: usize,
    pub xi: f64,
    pub activation: Activation,
    pub input: InputKind,
    #[serde(default = "default_mc_samples")]
    pub mc_samples: usize,
    #[serde(default)]
    pub mc_seed: u64,
}

fn default_mc_samples() -> usize {
    DEFAULT_MC_SAMPLES
}

impl KernelConfig {
    pub fn new(layers: usize, xi: f64, activation: Activation, input: InputKind) -> Result<Self> {
        let c = Self { layers, xi, activation, input, mc_samples: DEFAULT_MC_SAMPLES, mc_seed: 0 };
        c.validate()?;
        Ok(c)
    }

    pub fn with_mc(mut self, samples: usize, seed: u64) -> Self {
        self.mc_samples = samples;
        self.mc_seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.layers == 0 {
            return Err(Error::Validation("layer count must be at least 1".into()));
        }
        if !(self.xi >= 0.0) || !self.xi.is_finite() {
            return Err(Error::Validation(format!("bias coefficient must be non-negative, got {}", self.xi)));
        }
        if self.activation == Activation::Sigmoid && self.layers > 1 && self.mc_samples == 0 {
            return Err(Error::Validation("sigmoid recursion needs mc_samples > 0".into()));
        }
        match &self.input {
            InputKind::Classical { n0 } if *n0 == 0 => Err(Error::Validation("n0 must be positive".into())),
            InputKind::Quantum { m, encoder, .. } if *m == 0 || encoder.n % m != 0 => {
                Err(Error::Validation(format!("locality {m} does not divide {} qubits", encoder.n)))
            }
            _ => Ok(()),
        }
    }

    pub fn is_quantum(&self) -> bool {
        matches!(self.input, InputKind::Quantum { .. })
    }

    /// First-layer covariance Gram on raw inputs.
    pub fn first_layer(&self, xs: &[Vec<f64>]) -> Result<DMatrix<f64>> {
        self.validate()?;
        match &self.input {
            InputKind::Classical { n0 } => gram(xs, |a, b| sigma_classical_1(a, b, *n0, self.xi)),
            InputKind::Quantum { m, trace_o_sq, encoder } => {
                let windows = crate::qsim::window_states(xs, encoder, *m)?;
                gram(&windows, |a, b| sigma_q_1_windows(a, b, *trace_o_sq, self.xi))
            }
        }
    }

    /// First-layer covariance between two sets of raw inputs.
    pub fn first_layer_cross(&self, rows: &[Vec<f64>], cols: &[Vec<f64>]) -> Result<DMatrix<f64>> {
        self.validate()?;
        match &self.input {
            InputKind::Classical { n0 } => super::gram::cross_gram(rows, cols, |a, b| sigma_classical_1(a, b, *n0, self.xi)),
            InputKind::Quantum { m, trace_o_sq, encoder } => {
                let wr = crate::qsim::window_states(rows, encoder, *m)?;
                let wc = crate::qsim::window_states(cols, encoder, *m)?;
                super::gram::cross_gram(&wr, &wc, |a, b| sigma_q_1_windows(a, b, *trace_o_sq, self.xi))
            }
        }
    }

    /// Analytic `Θ^{(L)}` Gram on raw inputs.
    pub fn ntk(&self, xs: &[Vec<f64>]) -> Result<DMatrix<f64>> {
        Ok(theta_recursion(self, &self.first_layer(xs)?)?.theta)
    }

    /// Analytic `Σ^{(L)}` Gram on raw inputs: the covariance of the outputs at init.
    pub fn nngp(&self, xs: &[Vec<f64>]) -> Result<DMatrix<f64>> {
        let layers = theta_recursion(self, &self.first_layer(xs)?)?;
        Ok(layers.sigma.last().cloned().expect("at least one layer"))
    }

    /// `Θ^{(L)}(x, x′)` for test rows against training columns.
    pub fn ntk_cross(&self, rows: &[Vec<f64>], cols: &[Vec<f64>]) -> Result<DMatrix<f64>> {
        let cross = self.first_layer_cross(rows, cols)?;
        let dr = diag_first_layer(self, rows)?;
        let dc = diag_first_layer(self, cols)?;
        theta_recursion_cross(self, &cross, &dr, &dc)
    }
}

fn diag_first_layer(cfg: &KernelConfig, xs: &[Vec<f64>]) -> Result<Vec<f64>> {
    match &cfg.input {
        InputKind::Classical { n0 } => xs.iter().map(|x| sigma_classical_1(x, x, *n0, cfg.xi)).collect(),
        InputKind::Quantum { m, trace_o_sq, encoder } => crate::qsim::window_states(xs, encoder, *m)?
            .iter()
            .map(|w| sigma_q_1_windows(w, w, *trace_o_sq, cfg.xi))
            .collect(),
    }
}

/// One step of the recursion for a single entry: `(Σ^{(ℓ+1)}, Σ̇^{(ℓ)})`.
pub fn layer_step(cfg: &KernelConfig, kxx: f64, kxy: f64, kyy: f64, tags: &[u64]) -> Result<(f64, f64)> {
    let xi2 = cfg.xi * cfg.xi;
    match cfg.activation {
        Activation::Relu => Ok((relu_next_sigma(kxx, kxy, kyy, cfg.xi)?, relu_sigma_dot(kxx, kxy, kyy)?)),
        Activation::Identity => Ok((kxy + xi2, 1.0)),
        Activation::Sigmoid => {
            let cov = [[kxx, kxy], [kxy, kyy]];
            let mut r = rng::substream(cfg.mc_seed, tags);
            let s = mc_gaussian_expectation(cov, |a, b| Activation::Sigmoid.apply(a) * Activation::Sigmoid.apply(b), cfg.mc_samples, &mut r)?;
            let d = mc_gaussian_expectation(
                cov,
                |a, b| Activation::Sigmoid.derivative(a) * Activation::Sigmoid.derivative(b),
                cfg.mc_samples,
                &mut r,
            )?;
            Ok((s.mean + xi2, d.mean))
        }
    }
}

/// Covariances `Σ^{(1..L)}`, derivatives `Σ̇^{(1..L-1)}` and `Θ^{(L)}`.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerKernels {
    pub sigma: Vec<DMatrix<f64>>,
    pub sigma_dot: Vec<DMatrix<f64>>,
    pub theta: DMatrix<f64>,
}

/// Runs the recursion from a symmetric first-layer Gram.
pub fn theta_recursion(cfg: &KernelConfig, sigma1: &DMatrix<f64>) -> Result<LayerKernels> {
    cfg.validate()?;
    if !sigma1.is_square() {
        return Err(Error::Shape(format!("first-layer Gram is {}x{}", sigma1.nrows(), sigma1.ncols())));
    }
    let n = sigma1.nrows();
    let mut sigma = vec![sigma1.clone()];
    let mut sigma_dot = Vec::with_capacity(cfg.layers.saturating_sub(1));
    for l in 1..cfg.layers {
        let prev = &sigma[l - 1];
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a..n).map(move |b| (a, b))).collect();
        let vals: Vec<(f64, f64)> = pairs
            .par_iter()
            .map(|&(a, b)| {
                layer_step(cfg, prev[(a, a)], prev[(a, b)], prev[(b, b)], &[l as u64, a as u64, b as u64])
                    .map_err(|e| Error::KernelEntry { row: a, col: b, source: Box::new(e) })
            })
            .collect::<Result<_>>()?;
        let mut s = DMatrix::zeros(n, n);
        let mut d = DMatrix::zeros(n, n);
        for (&(a, b), &(sv, dv)) in pairs.iter().zip(&vals) {
            s[(a, b)] = sv;
            s[(b, a)] = sv;
            d[(a, b)] = dv;
            d[(b, a)] = dv;
        }
        sigma.push(s);
        sigma_dot.push(d);
    }
    let theta = theta_from_layers(&sigma, &sigma_dot)?;
    Ok(LayerKernels { sigma, sigma_dot, theta })
}

/// `Θ^{(1)} = Σ^{(1)}`, `Θ^{(ℓ+1)} = Θ^{(ℓ)} ∘ Σ̇^{(ℓ)} + Σ^{(ℓ+1)}`.
pub fn theta_from_layers(sigma: &[DMatrix<f64>], sigma_dot: &[DMatrix<f64>]) -> Result<DMatrix<f64>> {
    let first = sigma.first().ok_or_else(|| Error::State("no covariance layers".into()))?;
    if sigma_dot.len() + 1 != sigma.len() {
        return Err(Error::State(format!("{} covariance layers but {} derivative layers", sigma.len(), sigma_dot.len())));
    }
    let mut theta = first.clone();
    for (s, d) in sigma[1..].iter().zip(sigma_dot) {
        if s.shape() != theta.shape() || d.shape() != theta.shape() {
            return Err(Error::Shape("layer shapes differ".into()));
        }
        theta = theta.component_mul(d) + s;
    }
    Ok(theta)
}

/// Rectangular recursion: `cross` holds first-layer values between row and
/// column points, `row_diag`/`col_diag` their first-layer self-covariances.
pub fn theta_recursion_cross(cfg: &KernelConfig, cross: &DMatrix<f64>, row_diag: &[f64], col_diag: &[f64]) -> Result<DMatrix<f64>> {
    cfg.validate()?;
    let (nr, nc) = cross.shape();
    if row_diag.len() != nr || col_diag.len() != nc {
        return Err(Error::Shape("diagonal lengths do not match the cross block".into()));
    }
    let mut s = cross.clone();
    let mut rd = row_diag.to_vec();
    let mut cd = col_diag.to_vec();
    let mut theta = cross.clone();
    for l in 1..cfg.layers {
        let lt = l as u64;
        let next: Vec<(f64, f64)> = (0..nr * nc)
            .into_par_iter()
            .map(|idx| {
                let (a, b) = (idx % nr, idx / nr);
                layer_step(cfg, rd[a], s[(a, b)], cd[b], &[lt, a as u64, b as u64, 0x5843])
                    .map_err(|e| Error::KernelEntry { row: a, col: b, source: Box::new(e) })
            })
            .collect::<Result<_>>()?;
        let step_diag = |d: &[f64], tag: u64| -> Result<Vec<f64>> {
            d.par_iter()
                .enumerate()
                .map(|(a, &k)| layer_step(cfg, k, k, k, &[lt, a as u64, a as u64, tag]).map(|v| v.0))
                .collect()
        };
        let new_rd = step_diag(&rd, 0x5244)?;
        let new_cd = step_diag(&cd, 0x4344)?;
        let s_next = DMatrix::from_fn(nr, nc, |a, b| next[a + b * nr].0);
        let dot = DMatrix::from_fn(nr, nc, |a, b| next[a + b * nr].1);
        theta = theta.component_mul(&dot) + &s_next;
        s = s_next;
        rd = new_rd;
        cd = new_cd;
    }
    Ok(theta)
}

/// Gram of `Σ_Q^{(1)}` from precomputed window states.
pub fn quantum_first_layer(windows: &[Vec<DensityMatrix>], trace_o_sq: f64, xi: f64) -> Result<DMatrix<f64>> {
    gram(windows, |a, b| sigma_q_1_windows(a, b, trace_o_sq, xi))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn classical(layers: usize, xi: f64, act: Activation) -> KernelConfig {
        KernelConfig::new(layers, xi, act, InputKind::Classical { n0: 3 }).unwrap()
    }

    #[test]
    fn base_case_is_first_layer() {
        let s1 = DMatrix::from_row_slice(2, 2, &[1.0, 0.3, 0.3, 2.0]);
        let out = theta_recursion(&classical(1, 0.5, Activation::Relu), &s1).unwrap();
        assert_eq!(out.theta, s1);
    }

    #[test]
    fn relu_two_layer_diagonal() {
        let k = 1.7;
        let xi = 0.4;
        let s1 = DMatrix::from_element(1, 1, k);
        let out = theta_recursion(&classical(2, xi, Activation::Relu), &s1).unwrap();
        assert!((out.theta[(0, 0)] - (k + xi * xi)).abs() < 1e-14);
    }

    #[test]
    fn missing_layer_is_state_error() {
        let s = DMatrix::<f64>::identity(2, 2);
        assert!(matches!(theta_from_layers(&[], &[]), Err(Error::State(_))));
        assert!(matches!(theta_from_layers(&[s.clone(), s], &[]), Err(Error::State(_))));
    }

    #[test]
    fn cross_matches_square_block() {
        let xs: Vec<Vec<f64>> = vec![vec![0.1, 0.5, -0.2], vec![0.9, -0.3, 0.4], vec![-0.6, 0.2, 0.8]];
        let cfg = classical(3, 0.3, Activation::Relu);
        let full = cfg.ntk(&xs).unwrap();
        let cross = cfg.ntk_cross(&xs[2..], &xs[..2]).unwrap();
        for b in 0..2 {
            assert!((cross[(0, b)] - full[(2, b)]).abs() < 1e-13);
        }
    }

    #[test]
    fn identity_activation_is_linear() {
        let s1 = DMatrix::from_row_slice(2, 2, &[1.0, 0.2, 0.2, 1.5]);
        let out = theta_recursion(&classical(2, 0.0, Activation::Identity), &s1).unwrap();
        assert!((out.theta - &s1 * 2.0).amax() < 1e-15);
    }
}
