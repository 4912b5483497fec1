use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use qntk::dynamics::{advantage_gap, bce_trajectory, diagonalize, expected_cost, expected_cost_terms, CostMode};
use qntk::rng;

fn random_psd(n: usize, r: &mut rng::Rng) -> DMatrix<f64> {
    let g = DMatrix::from_fn(n, n, |_, _| r.sample::<f64, _>(StandardNormal));
    &g * g.transpose() / n as f64
}

#[test]
fn random_psd_reconstructs() {
    let mut r = rng::seeded(1);
    let k = random_psd(10, &mut r);
    let m = diagonalize(&k, &[0.0; 10], &[0.0; 10]).unwrap();
    assert!((m.reconstruct() - &k).amax() <= 1e-10);
    assert!((&m.v * m.v.transpose() - DMatrix::identity(10, 10)).amax() <= 1e-10);
    assert!(m.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
}

#[test]
fn two_point_system_matches_forward_euler() {
    let k = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
    let (y, f0, eta) = ([1.0, -0.5], [0.2, 0.3], 0.01);
    let h = 1e-4;
    let mut f = DVector::from_column_slice(&f0);
    let yv = DVector::from_column_slice(&y);
    for _ in 0..10_000 {
        let r = &f - &yv;
        f -= (&k * r) * (eta * h);
    }
    let exact = diagonalize(&k, &y, &f0).unwrap().outputs_at(eta, 1.0);
    for (a, b) in f.iter().zip(&exact) {
        assert!((a - b).abs() <= 1e-6);
    }
}

#[test]
fn converged_prediction_interpolates_training_points() {
    let mut r = rng::seeded(2);
    let k = random_psd(6, &mut r) + DMatrix::identity(6, 6) * 0.5;
    let y: Vec<f64> = (0..6).map(|_| r.random_range(-1.0..1.0)).collect();
    let f0: Vec<f64> = (0..6).map(|_| r.random_range(-1.0..1.0)).collect();
    let m = diagonalize(&k, &y, &f0).unwrap();
    for a in 0..6 {
        let row: Vec<f64> = k.row(a).iter().copied().collect();
        assert!((m.predict(&row, f0[a], 1.0, 1e4).unwrap() - y[a]).abs() <= 1e-8);
        assert_eq!(m.predict(&row, f0[a], 1.0, 0.0).unwrap(), f0[a]);
        assert_eq!(m.mean_prediction(&row, 1.0, 0.0).unwrap(), 0.0);
    }
}

#[test]
fn zero_mode_factor_is_the_small_eigenvalue_limit() {
    let k = DMatrix::from_diagonal(&DVector::from_column_slice(&[1.0, 1e-12, 0.0]));
    let m = diagonalize(&k, &[0.0; 3], &[0.0; 3]).unwrap();
    let (eta, t) = (0.3, 2.0);
    let d = m.d_factors(eta, t);
    assert_eq!(d[2], eta * t);
    let limit = -(-eta * 1e-12 * t).exp_m1() / 1e-12;
    assert!((d[1] - limit).abs() <= 1e-6 * limit);
}

#[test]
fn expected_cost_limits() {
    let mut r = rng::seeded(3);
    let n = 8;
    let k = random_psd(n, &mut r) + DMatrix::identity(n, n) * 0.1;
    let cov = random_psd(n, &mut r);
    let y: Vec<f64> = (0..n).map(|_| r.random_range(-1.0..1.0)).collect();
    let m = diagonalize(&k, &y, &vec![0.0; n]).unwrap();
    for mode in [CostMode::HardStep, CostMode::Exact] {
        let early = expected_cost(&m, &cov, 1.0, 1e-12, mode).unwrap();
        let full = (cov.trace() + y.iter().map(|v| v * v).sum::<f64>()) / n as f64;
        assert!((early - full).abs() <= 1e-8 * full);
        assert!(expected_cost(&m, &cov, 1.0, 1e6, mode).unwrap() <= 1e-12);
    }
    // labels on the bottom eigenvector stay fully misaligned under early stopping
    let bottom: Vec<f64> = m.v.row(n - 1).iter().copied().collect();
    let m2 = diagonalize(&k, &bottom, &vec![0.0; n]).unwrap();
    let tau = 0.5 / m2.lambda_min();
    let terms = expected_cost_terms(&m2, &cov, 1.0, tau, CostMode::HardStep).unwrap();
    assert!((terms.label - 1.0 / n as f64).abs() <= 1e-10);
}

#[test]
fn advantage_gap_is_difference_of_costs() {
    let mut r = rng::seeded(4);
    let n = 5;
    let y: Vec<f64> = (0..n).map(|_| r.random_range(-1.0..1.0)).collect();
    let kc = random_psd(n, &mut r);
    let kq = random_psd(n, &mut r);
    let (cc, cq) = (random_psd(n, &mut r), random_psd(n, &mut r));
    let mc = diagonalize(&kc, &y, &vec![0.0; n]).unwrap();
    let mq = diagonalize(&kq, &y, &vec![0.0; n]).unwrap();
    let gap = advantage_gap((&mc, &cc), (&mq, &cq), 0.5, 3.0, CostMode::HardStep).unwrap();
    let want = expected_cost(&mc, &cc, 0.5, 3.0, CostMode::HardStep).unwrap() - expected_cost(&mq, &cq, 0.5, 3.0, CostMode::HardStep).unwrap();
    assert!((gap - want).abs() <= 1e-12);
}

#[test]
fn bce_step_refinement_converges() {
    let mut r = rng::seeded(5);
    let k = random_psd(6, &mut r) + DMatrix::identity(6, 6) * 0.2;
    let y = [1.0, 0.0, 1.0, 1.0, 0.0, 0.0];
    let f0: Vec<f64> = (0..6).map(|_| r.sample(StandardNormal)).collect();
    let a = bce_trajectory(&k, &y, &f0, 1.0, Some(0.05), 5.0).unwrap();
    let b = bce_trajectory(&k, &y, &f0, 1.0, Some(0.025), 5.0).unwrap();
    assert!(a.cost.windows(2).all(|w| w[1] < w[0]));
    let (fa, fb) = (a.outputs.last().unwrap(), b.outputs.last().unwrap());
    assert!(fa.iter().zip(fb).all(|(p, q)| (p - q).abs() <= 1e-6));
    assert!((a.times.last().unwrap() - 5.0).abs() < 1e-12);
}
