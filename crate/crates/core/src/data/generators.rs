use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use std::f64::consts::PI;

use super::dataset::{Dataset, Provenance};
use crate::error::{Error, Result};
use crate::rng;

pub const SIN_NOISE_SD: f64 = 0.05;

/// `(x, x², x³, x⁴)`.
pub fn sin_features(x: f64) -> Vec<f64> {
    vec![x, x * x, x.powi(3), x.powi(4)]
}

pub fn hard_sin_target(x: f64) -> f64 {
    (x - 0.2).powi(2) * (12.0 * x).sin()
}

fn scalar_task(n_d: usize, seed: u64, name: &str, target: impl Fn(f64) -> f64, noise_sd: f64) -> Result<Dataset> {
    if n_d == 0 {
        return Err(Error::Argument("dataset size must be positive".into()));
    }
    let noise = Normal::new(0.0, noise_sd).map_err(|e| Error::Argument(e.to_string()))?;
    let mut r = rng::substream(seed, &[0x5349_4E45]);
    let mut inputs = Vec::with_capacity(n_d);
    let mut labels = Vec::with_capacity(n_d);
    for _ in 0..n_d {
        let x: f64 = r.random_range(-1.0..1.0);
        let eps = if noise_sd > 0.0 { noise.sample(&mut r) } else { 0.0 };
        inputs.push(sin_features(x));
        labels.push(target(x) + eps);
    }
    let prov = Provenance { generator: name.into(), seed, params: serde_json::json!({ "n_points": n_d, "noise_sd": noise_sd }) };
    Dataset::new(inputs, labels, prov)
}

/// `y = sin(x) + N(0, noise_sd²)` with `x ~ U(−1, 1)`, inputs `(x, x², x³, x⁴)`.
pub fn gen_sin(n_d: usize, noise_sd: f64, seed: u64) -> Result<Dataset> {
    scalar_task(n_d, seed, "sin", f64::sin, noise_sd)
}

/// `y = (x − 0.2)² sin(12x)`, noiseless.
pub fn gen_hard_sin(n_d: usize, seed: u64) -> Result<Dataset> {
    scalar_task(n_d, seed, "hard_sin", hard_sin_target, 0.0)
}

pub fn adhoc_label(x1: f64, x2: f64) -> f64 {
    if (3.0 * PI * x1).sin() * (3.0 * PI * x2).sin() > 0.0 {
        1.0
    } else {
        0.0
    }
}

/// Balanced two-class checkerboard on `[−1, 1]²`, `n_per_class` points each.
pub fn gen_adhoc_substitute(n_per_class: usize, seed: u64) -> Result<Dataset> {
    if n_per_class == 0 {
        return Err(Error::Argument("class size must be positive".into()));
    }
    let mut r = rng::substream(seed, &[0x4144_484F]);
    let mut by_class: [Vec<Vec<f64>>; 2] = [Vec::new(), Vec::new()];
    while by_class.iter().any(|c| c.len() < n_per_class) {
        let x = vec![r.random_range(-1.0..=1.0), r.random_range(-1.0..=1.0)];
        let c = adhoc_label(x[0], x[1]) as usize;
        if by_class[c].len() < n_per_class {
            by_class[c].push(x);
        }
    }
    let mut points: Vec<(Vec<f64>, f64)> =
        by_class.into_iter().enumerate().flat_map(|(c, xs)| xs.into_iter().map(move |x| (x, c as f64))).collect();
    points.shuffle(&mut r);
    let (inputs, labels) = points.into_iter().unzip();
    let prov = Provenance { generator: "adhoc_substitute".into(), seed, params: serde_json::json!({ "n_per_class": n_per_class }) };
    Dataset::new(inputs, labels, prov)
}
