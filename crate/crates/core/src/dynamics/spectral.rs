//! Closed-form gradient-flow dynamics under a fixed tangent kernel.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use std::io::Write;

use crate::error::{Error, Result};

/// Relative floor below which an eigenvalue counts as zero.
pub const ZERO_EIGEN_REL: f64 = 1e-12;

/// Eigensystem of a kernel Gram together with labels and initial outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralModel {
    /// Descending.
    pub eigenvalues: Vec<f64>,
    /// Row `j` is the eigenvector of `eigenvalues[j]`.
    pub v: DMatrix<f64>,
    pub labels: Vec<f64>,
    pub f0: Vec<f64>,
}

/// Output trajectory on a time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// `outputs[i][a]` is `f_{t_i}(x^a)`.
    pub outputs: Vec<Vec<f64>>,
    pub cost: Vec<f64>,
}

impl Trajectory {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut cw = csv::Writer::from_writer(w);
        let n = self.outputs.first().map_or(0, Vec::len);
        let mut head = vec!["t".to_string(), "cost".to_string()];
        head.extend((1..=n).map(|a| format!("f{a}")));
        cw.write_record(&head)?;
        for ((t, c), f) in self.times.iter().zip(&self.cost).zip(&self.outputs) {
            let mut rec = vec![t.to_string(), c.to_string()];
            rec.extend(f.iter().map(f64::to_string));
            cw.write_record(&rec)?;
        }
        cw.flush()?;
        Ok(())
    }
}

/// `½ Σ_a (f_a − y_a)²`.
pub fn mse_cost(f: &[f64], y: &[f64]) -> f64 {
    0.5 * f.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>()
}

/// Eigen-decomposes a symmetric PSD Gram. Eigenvalues within
/// `-1e-8·λ_max` of zero are clamped to zero.
pub fn diagonalize(k: &DMatrix<f64>, y: &[f64], f0: &[f64]) -> Result<SpectralModel> {
    if !k.is_square() || k.nrows() == 0 {
        return Err(Error::Shape(format!("kernel is {}x{}", k.nrows(), k.ncols())));
    }
    let n = k.nrows();
    if y.len() != n || f0.len() != n {
        return Err(Error::Shape(format!("{n} points but {} labels and {} initial outputs", y.len(), f0.len())));
    }
    let scale = k.amax().max(f64::MIN_POSITIVE);
    if (k - k.transpose()).amax() > 1e-10 * scale {
        return Err(Error::Validation("kernel matrix is not symmetric".into()));
    }
    let eig = ((k + k.transpose()) * 0.5).symmetric_eigen();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let lmax = eig.eigenvalues[idx[0]].max(0.0);
    let mut eigenvalues = Vec::with_capacity(n);
    for &i in &idx {
        let l = eig.eigenvalues[i];
        if l < -1e-8 * lmax.max(scale) {
            return Err(Error::Validation(format!("kernel has negative eigenvalue {l}")));
        }
        eigenvalues.push(l.max(0.0));
    }
    let v = DMatrix::from_fn(n, n, |j, a| eig.eigenvectors[(a, idx[j])]);
    Ok(SpectralModel { eigenvalues, v, labels: y.to_vec(), f0: f0.to_vec() })
}

impl SpectralModel {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn lambda_max(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }

    pub fn lambda_min(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }

    /// `Vᵀ Λ V`.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let lam = DMatrix::from_diagonal(&DVector::from_column_slice(&self.eigenvalues));
        self.v.transpose() * lam * &self.v
    }

    /// `w_j = Σ_a V_{ja} f_a`.
    pub fn project(&self, f: &[f64]) -> Vec<f64> {
        (&self.v * DVector::from_column_slice(f)).iter().copied().collect()
    }

    /// `g_j = Σ_a V_{ja} y_a`.
    pub fn label_projection(&self) -> Vec<f64> {
        self.project(&self.labels)
    }

    fn is_zero_mode(&self, j: usize) -> bool {
        self.eigenvalues[j] <= ZERO_EIGEN_REL * self.lambda_max()
    }

    /// `f_t(x^a) = Σ_j V_{aj}ᵀ (w_j(0) − g_j) e^{−ηλ_j t} + y^a`.
    pub fn outputs_at(&self, eta: f64, t: f64) -> Vec<f64> {
        let r0 = self.project(&self.f0.iter().zip(&self.labels).map(|(f, y)| f - y).collect::<Vec<_>>());
        let decayed = DVector::from_iterator(r0.len(), r0.iter().zip(&self.eigenvalues).map(|(r, l)| r * (-eta * l * t).exp()));
        let f = self.v.transpose() * decayed;
        f.iter().zip(&self.labels).map(|(d, y)| d + y).collect()
    }

    pub fn mse_trajectory(&self, eta: f64, times: &[f64]) -> Result<Trajectory> {
        if !(eta > 0.0) {
            return Err(Error::Argument(format!("learning rate must be positive, got {eta}")));
        }
        let outputs: Vec<Vec<f64>> = times.par_iter().map(|&t| self.outputs_at(eta, t)).collect();
        let cost = outputs.iter().map(|f| mse_cost(f, &self.labels)).collect();
        Ok(Trajectory { times: times.to_vec(), outputs, cost })
    }

    /// `D_j = (1 − e^{−ηλ_j t})/λ_j`, or `ηt` for numerically zero `λ_j`.
    pub fn d_factors(&self, eta: f64, t: f64) -> Vec<f64> {
        (0..self.eigenvalues.len())
            .map(|j| {
                let l = self.eigenvalues[j];
                if self.is_zero_mode(j) {
                    eta * t
                } else {
                    -(-eta * l * t).exp_m1() / l
                }
            })
            .collect()
    }

    /// Prediction at an unseen point from its kernel row `Θ(x, x^b)` and
    /// its initial output `f_0(x)`.
    pub fn predict(&self, kernel_row: &[f64], f0_x: f64, eta: f64, t: f64) -> Result<f64> {
        Ok(f0_x + self.correction(kernel_row, &self.f0, eta, t)?)
    }

    /// Prediction averaged over initializations (`f_0` has zero mean).
    pub fn mean_prediction(&self, kernel_row: &[f64], eta: f64, t: f64) -> Result<f64> {
        self.correction(kernel_row, &vec![0.0; self.len()], eta, t)
    }

    fn correction(&self, kernel_row: &[f64], f0: &[f64], eta: f64, t: f64) -> Result<f64> {
        if kernel_row.len() != self.len() {
            return Err(Error::Shape(format!("kernel row of length {}, expected {}", kernel_row.len(), self.len())));
        }
        let r = self.project(&f0.iter().zip(&self.labels).map(|(f, y)| f - y).collect::<Vec<_>>());
        let k = self.project(kernel_row);
        let d = self.d_factors(eta, t);
        Ok(-(0..self.len()).map(|j| k[j] * d[j] * r[j]).sum::<f64>())
    }

    /// Predictions for each row of a test × train kernel block.
    pub fn predict_batch(&self, cross: &DMatrix<f64>, f0_test: &[f64], eta: f64, t: f64) -> Result<Vec<f64>> {
        if f0_test.len() != cross.nrows() {
            return Err(Error::Shape("one initial output per test row required".into()));
        }
        (0..cross.nrows())
            .map(|i| {
                let row: Vec<f64> = cross.row(i).iter().copied().collect();
                self.predict(&row, f0_test[i], eta, t)
            })
            .collect()
    }

    /// CSV with one row per eigenpair: `lambda, v1, …, vN`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut cw = csv::Writer::from_writer(w);
        let mut head = vec!["lambda".to_string()];
        head.extend((1..=self.len()).map(|a| format!("v{a}")));
        cw.write_record(&head)?;
        for j in 0..self.len() {
            let mut rec = vec![self.eigenvalues[j].to_string()];
            rec.extend(self.v.row(j).iter().map(f64::to_string));
            cw.write_record(&rec)?;
        }
        cw.flush()?;
        Ok(())
    }
}
