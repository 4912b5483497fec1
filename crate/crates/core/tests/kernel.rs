use nalgebra::DMatrix;
use rand::Rng;

use qntk::kernel::{
    empirical_ntk, gram, pd_check, quantum_first_layer, sigma_classical_1, sigma_q_1_windows, theta_recursion, InputKind, KernelConfig,
    DEFAULT_PD_TOL,
};
use qntk::nn::{Activation, NetworkConfig, NetworkState};
use qntk::qsim::{feature_matrix, window_states, Ansatz, DensityMatrix, EncoderSpec, RandomMeasurement};
use qntk::rng;

#[test]
fn classical_first_layer_is_a_scaled_dot_product() {
    let mut r = rng::seeded(1);
    for _ in 0..20 {
        let x: Vec<f64> = (0..7).map(|_| r.random_range(-2.0..2.0)).collect();
        let y: Vec<f64> = (0..7).map(|_| r.random_range(-2.0..2.0)).collect();
        let dot: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
        let got = sigma_classical_1(&x, &y, 7, 0.3).unwrap();
        assert!((got - (dot / 7.0 + 0.09)).abs() <= 1e-14);
    }
}

#[test]
fn pure_zero_windows_give_one_third() {
    let rho = vec![DensityMatrix::from_matrix(DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]).map(|v| v.into())).unwrap()];
    let v = sigma_q_1_windows(&rho, &rho, 2.0, 0.0).unwrap();
    assert!((v - 1.0 / 3.0).abs() < 1e-15);
}

#[test]
fn quantum_and_classical_recursions_differ_only_through_the_first_layer() {
    let s1 = DMatrix::from_row_slice(3, 3, &[1.0, 0.4, -0.2, 0.4, 0.8, 0.1, -0.2, 0.1, 1.5]);
    let enc = EncoderSpec::new(Ansatz::Bc, 2).unwrap();
    let c = KernelConfig::new(3, 0.5, Activation::Relu, InputKind::Classical { n0: 2 }).unwrap();
    let q = KernelConfig::new(3, 0.5, Activation::Relu, InputKind::Quantum { m: 1, trace_o_sq: 2.0, encoder: enc }).unwrap();
    assert_eq!(theta_recursion(&c, &s1).unwrap().theta, theta_recursion(&q, &s1).unwrap().theta);
}

#[test]
fn quantum_gram_is_symmetric_and_psd() {
    let spec = EncoderSpec::new(Ansatz::B, 2).unwrap();
    let mut r = rng::seeded(2);
    let xs: Vec<Vec<f64>> = (0..5).map(|_| (0..2).map(|_| r.random_range(-1.0..1.0)).collect()).collect();
    let w = window_states(&xs, &spec, 1).unwrap();
    let k = quantum_first_layer(&w, 2.0, 0.0).unwrap();
    assert!((&k - k.transpose()).amax() <= 1e-12);
    let eig = k.symmetric_eigenvalues();
    assert!(eig.iter().all(|&l| l >= -1e-12));
}

#[test]
fn gram_of_duplicates_is_singular() {
    let xs = vec![vec![0.3, 0.1], vec![0.3, 0.1]];
    let k = gram(&xs, |a, b| sigma_classical_1(a, b, 2, 0.0)).unwrap();
    assert!(k.determinant().abs() < 1e-15);
}

#[test]
fn width_one_layer_ntk_is_feature_inner_product() {
    let spec = EncoderSpec::new(Ansatz::A, 3).unwrap();
    let meas = RandomMeasurement::sample(3, 1, 50, None, 3).unwrap();
    let xs = vec![vec![0.1, 0.2, 0.3], vec![-0.5, 0.0, 0.9], vec![0.7, 0.7, -0.2]];
    let f = feature_matrix(&xs, &spec, &meas, None).unwrap();
    let xi = 0.4;
    let head = NetworkState::init(NetworkConfig::new(vec![50, 1], xi, Activation::Identity).unwrap(), 4).unwrap();
    let k = empirical_ntk(&head, &f).unwrap().entries;
    let want = (&f * f.transpose()) / 50.0 + DMatrix::from_element(3, 3, xi * xi);
    assert!((k - want).amax() <= 1e-12);
}

#[test]
fn single_point_ntk_is_positive() {
    let net = NetworkState::init(NetworkConfig::new(vec![3, 20, 1], 0.1, Activation::Relu).unwrap(), 5).unwrap();
    let x = DMatrix::from_row_slice(1, 3, &[0.2, -0.4, 0.9]);
    assert!(empirical_ntk(&net, &x).unwrap().entries[(0, 0)] > 0.0);
}

#[test]
fn duplicate_has_pairwise_witness_and_distinct_set_is_pd() {
    let spec = EncoderSpec::new(Ansatz::B, 2).unwrap();
    let xs = vec![vec![0.1, 0.5], vec![-0.4, 0.2], vec![0.1, 0.5]];
    let w = window_states(&xs, &spec, 1).unwrap();
    let rep = pd_check(&quantum_first_layer(&w, 2.0, 0.3).unwrap(), Some(&w), 0.3, DEFAULT_PD_TOL);
    assert!(!rep.is_pd);
    let wit = rep.witness.unwrap();
    assert_eq!(wit.condition_i, Some(true));
    let c = &wit.coefficients;
    assert!(c[1].abs() < 1e-8 && (c[0] + c[2]).abs() < 1e-8 && c[0].abs() > 0.5);

    let w2 = window_states(&xs[..2], &spec, 1).unwrap();
    assert!(pd_check(&quantum_first_layer(&w2, 2.0, 0.3).unwrap(), Some(&w2), 0.3, DEFAULT_PD_TOL).is_pd);
}

#[test]
fn identity_report() {
    let rep = pd_check(&DMatrix::identity(4, 4), None, 0.0, DEFAULT_PD_TOL);
    assert!(rep.is_pd && (rep.min_eigenvalue - 1.0).abs() < 1e-15);
}
