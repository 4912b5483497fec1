use std::io::Write;

use qntk::data::{gen_adhoc_substitute, gen_hard_sin, gen_quantum_data, gen_sin, hard_sin_target, load_csv_classification, QuantumDataConfig, Task};
use qntk::qsim::{expectation, Observable, Statevector};

fn variance(v: &[f64]) -> f64 {
    let m = v.iter().sum::<f64>() / v.len() as f64;
    v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / v.len() as f64
}

#[test]
fn sin_label_variance() {
    let d = gen_sin(100_000, 0.05, 1).unwrap();
    // Var[sin U] = 1/2 − sin(2)/4 for U ~ U(−1, 1)
    let want = 0.5 - 2f64.sin() / 4.0 + 0.05 * 0.05;
    assert!((variance(&d.labels) / want - 1.0).abs() <= 0.05);
    assert!(d.inputs.iter().all(|x| (x[1] - x[0] * x[0]).abs() < 1e-15 && x.len() == 4));
}

#[test]
fn hard_sin_peak_matches_grid() {
    let grid_max = (0..=200_000).map(|i| hard_sin_target(-1.0 + i as f64 * 1e-5).abs()).fold(0.0, f64::max);
    let d = gen_hard_sin(20_000, 2).unwrap();
    let seen = d.labels.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    assert!(seen <= grid_max + 1e-12 && seen >= 0.97 * grid_max);
}

#[test]
fn adhoc_is_reproducible() {
    assert_eq!(gen_adhoc_substitute(30, 3).unwrap(), gen_adhoc_substitute(30, 3).unwrap());
}

#[test]
fn product_observable_on_zero_state() {
    let s = Statevector::zero(3).unwrap();
    assert_eq!(expectation(&s, &Observable::z_projector_product(3)).unwrap(), 1.0);
    assert_eq!(expectation(&s, &Observable::z_projector_sum(3)).unwrap(), 3.0);
}

#[test]
fn standardised_regression_labels() {
    let q = gen_quantum_data(&QuantumDataConfig::new(3, 2000, 10, Task::Regression), 4).unwrap();
    assert!((variance(&q.train.labels) / (1.0 + 1e-4) - 1.0).abs() <= 0.05);
}

#[test]
fn classification_threshold_splits_on_g() {
    let mut cfg = QuantumDataConfig::new(2, 200, 50, Task::Classification);
    cfg.observable = qntk::data::ObservableForm::Product;
    cfg.threshold = Some(0.5);
    let q = gen_quantum_data(&cfg, 5).unwrap();
    let g = qntk::data::target_values(&q.train.inputs, &q.encoder, &q.observable).unwrap();
    assert!(g.iter().all(|v| (-1e-12..=1.0 + 1e-12).contains(v)));
    for (gv, y) in g.iter().zip(&q.train.labels) {
        assert_eq!(*y, if *gv >= 0.5 { 1.0 } else { 0.0 });
    }
}

#[test]
fn csv_loader_from_disk() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.csv");
    let mut f = std::fs::File::create(&path).unwrap();
    writeln!(f, "a,b,c,label\n0,10,3,1\n5,20,3,0\n2.5,15,3,1").unwrap();
    let d = load_csv_classification(&path, 3, (0.0, 1.0)).unwrap();
    assert_eq!(d.inputs, vec![vec![0.0, 0.0, 0.5], vec![1.0, 1.0, 0.5], vec![0.5, 0.5, 0.5]]);
    assert_eq!(d.labels, vec![1.0, 0.0, 1.0]);
    assert!(load_csv_classification(&dir.path().join("missing.csv"), 3, (0.0, 1.0)).is_err());
}
