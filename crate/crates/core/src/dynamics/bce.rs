//! Cross-entropy gradient flow `∂f/∂t = −η Θ (σ(f) − y)`, integrated by
//! fixed-step RK4.

use nalgebra::{DMatrix, DVector};

use super::spectral::Trajectory;
use crate::error::{Error, Result};
use crate::nn::{sigmoid, Loss};

/// Default step `0.1/(η λ_max)`.
pub fn default_bce_step(k: &DMatrix<f64>, eta: f64) -> f64 {
    let lmax = k.clone().symmetric_eigenvalues().iter().copied().fold(0.0, f64::max);
    if lmax > 0.0 && eta > 0.0 {
        0.1 / (eta * lmax)
    } else {
        f64::INFINITY
    }
}

/// Integrates to `t_end` with a step no larger than `step`; every step is
/// recorded. `step = None` uses [`default_bce_step`].
pub fn bce_trajectory(k: &DMatrix<f64>, y: &[f64], f0: &[f64], eta: f64, step: Option<f64>, t_end: f64) -> Result<Trajectory> {
    let n = k.nrows();
    if !k.is_square() || y.len() != n || f0.len() != n {
        return Err(Error::Shape("kernel, labels and initial outputs must agree".into()));
    }
    Loss::Bce.check_labels(y)?;
    if !(t_end >= 0.0) {
        return Err(Error::Argument(format!("end time must be non-negative, got {t_end}")));
    }
    let h_max = match step {
        Some(h) if !(h > 0.0) => return Err(Error::Argument(format!("step must be positive, got {h}"))),
        Some(h) => h,
        None => default_bce_step(k, eta),
    };
    let steps = if t_end == 0.0 { 0 } else { (t_end / h_max.min(t_end)).ceil() as usize };
    let h = if steps == 0 { 0.0 } else { t_end / steps as f64 };
    let yv = DVector::from_column_slice(y);
    let rhs = |f: &DVector<f64>| -> DVector<f64> { -(k * (f.map(sigmoid) - &yv)) * eta };
    let mut f = DVector::from_column_slice(f0);
    let mut times = vec![0.0];
    let mut outputs = vec![f0.to_vec()];
    let mut cost = vec![Loss::Bce.cost(f0, y)];
    for i in 1..=steps {
        let k1 = rhs(&f);
        let k2 = rhs(&(&f + &k1 * (h / 2.0)));
        let k3 = rhs(&(&f + &k2 * (h / 2.0)));
        let k4 = rhs(&(&f + &k3 * h));
        f += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        let out: Vec<f64> = f.iter().copied().collect();
        let c = Loss::Bce.cost(&out, y);
        if !c.is_finite() {
            return Err(Error::Divergence { step: i, msg: "cross-entropy became non-finite".into() });
        }
        times.push(i as f64 * h);
        cost.push(c);
        outputs.push(out);
    }
    Ok(Trajectory { times, outputs, cost })
}
