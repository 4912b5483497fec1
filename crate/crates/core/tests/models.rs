use qntk::data::{gen_quantum_data, gen_sin, QuantumDataConfig, Task, SIN_NOISE_SD};
use qntk::models::{compare_models, rmse, CompareConfig, ModelKind, QcnnModel, QnnModel};
use qntk::nn::{Batch, InitScheme, NetworkState, Optimizer};
use qntk::qsim::{Ansatz, EncoderSpec, Shots};

fn small_qcnn(task: Task, seed: u64) -> QcnnModel {
    QcnnModel::build(EncoderSpec::new(Ansatz::A, 2).unwrap(), 1, 30, task, 0.5, InitScheme::UnitGaussian, seed).unwrap()
}

#[test]
fn zero_head_outputs_boundary_values() {
    for task in [Task::Regression, Task::Classification] {
        let mut m = small_qcnn(task, 1);
        m.head = NetworkState::zeros(m.head.config.clone()).unwrap();
        let p = m.predict(&[0.2, 0.4], None).unwrap();
        match task {
            Task::Regression => assert_eq!(p, 0.0),
            Task::Classification => {
                assert_eq!(p, 0.5);
                assert_eq!(m.classify(&[0.2, 0.4], None).unwrap(), 1.0);
            }
        }
    }
}

#[test]
fn prediction_is_head_of_features() {
    let mut m = small_qcnn(Task::Regression, 2);
    let xs = vec![vec![0.1, 0.9], vec![-0.3, 0.2]];
    let f = m.features(&xs, None).unwrap();
    let batch = m.predict_batch(&xs, None).unwrap();
    for (a, x) in xs.iter().enumerate() {
        let row: Vec<f64> = f.row(a).iter().copied().collect();
        assert_eq!(m.head.forward(&row).unwrap(), batch[a]);
        assert_eq!(m.predict(x, None).unwrap(), batch[a]);
    }
}

#[test]
fn shots_converge_to_exact_features() {
    let mut m = small_qcnn(Task::Regression, 3);
    let xs = vec![vec![0.1, 0.9]];
    let exact = m.features(&xs, None).unwrap();
    let noisy = m.features(&xs, Some(Shots { n_shots: 1_000_000, seed: 1 })).unwrap();
    assert!((exact - noisy).amax() < 0.02);
}

#[test]
fn training_caches_features_and_freezes_unitaries() {
    let data = gen_sin(20, SIN_NOISE_SD, 4).unwrap();
    let mut m = QcnnModel::build(EncoderSpec::new(Ansatz::Bc, 4).unwrap(), 1, 40, Task::Regression, 1.0, InitScheme::UnitGaussian, 5).unwrap();
    let (enc, meas) = (m.encoder.clone(), m.measurement.clone());
    let mut opt = Optimizer::sgd(1e-3).unwrap();
    let t = m.train(&data, &mut opt, 25, Batch::Full, None).unwrap();
    assert_eq!(m.circuit_evaluations(), 20 * 40);
    assert_eq!(t.log.cost.len(), 26);
    assert_eq!(m.encoder, enc);
    assert_eq!(m.measurement, meas);
    let z = m.train(&data, &mut opt, 0, Batch::Full, None).unwrap();
    assert_eq!(z.log.cost.len(), 1);
}

#[test]
fn sin_task_cost_drops_below_a_tenth() {
    let mut ratios: Vec<f64> = (0..5u64)
        .map(|s| {
            let data = gen_sin(100, SIN_NOISE_SD, 10 + s).unwrap();
            let mut m = QcnnModel::build(EncoderSpec::new(Ansatz::Bc, 4).unwrap(), 1, 1000, Task::Regression, 1.0, InitScheme::UnitGaussian, 20 + s).unwrap();
            let mut opt = Optimizer::sgd(1e-4).unwrap();
            let log = m.train(&data, &mut opt, 3000, Batch::Full, None).unwrap().log;
            log.final_cost() / log.cost[0]
        })
        .collect();
    ratios.sort_by(f64::total_cmp);
    assert!(ratios[2] < 0.1, "median ratio {}", ratios[2]);
}

#[test]
fn qnn_output_scale_gradient_is_readout() {
    let data = gen_quantum_data(&QuantumDataConfig::new(2, 1, 1, Task::Regression), 6).unwrap();
    let mut m = QnnModel::new(data.encoder.clone(), 2, Task::Regression, 7).unwrap();
    let x = &data.train.inputs[0];
    let (e, y) = (m.readout(x).unwrap(), data.train.labels[0]);
    let w0 = m.w;
    // one plain gradient step on ½(w e − y)² moves w by −η (w e − y) e
    let mut opt = Optimizer::sgd(0.1).unwrap();
    m.train(&data.train, &mut opt, 1).unwrap();
    assert!((m.w - (w0 - 0.1 * (w0 * e - y) * e)).abs() < 1e-12);
}

#[test]
fn qnn_counter_and_training_progress() {
    let data = gen_quantum_data(&QuantumDataConfig::new(2, 40, 10, Task::Regression), 8).unwrap();
    let mut m = QnnModel::new(data.encoder.clone(), 2, Task::Regression, 9).unwrap();
    let before = rmse(&data.train.inputs.iter().map(|x| m.predict(x).unwrap()).collect::<Vec<_>>(), &data.train.labels);
    let mut opt = Optimizer::adam(1e-2).unwrap();
    m.train(&data.train, &mut opt, 1000).unwrap();
    let after = rmse(&data.train.inputs.iter().map(|x| m.predict(x).unwrap()).collect::<Vec<_>>(), &data.train.labels);
    assert!(after < before, "{after} vs {before}");
    assert_eq!(m.circuit_evaluations(), (2 * m.num_params() * 40 * 1000) as u64);
}

#[test]
fn comparison_report_is_reproducible_and_well_formed() {
    let mut cfg = CompareConfig::new(Task::Classification, vec![2], vec![1], 30, 10);
    cfg.n0 = 20;
    cfg.qnn_layers = 1;
    cfg.qcnn_steps = 20;
    cfg.cnn_steps = 20;
    cfg.qnn_steps = 5;
    let a = compare_models(&cfg).unwrap();
    let b = compare_models(&cfg).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.rows.len(), 3);
    let qnn = a.rows.iter().find(|r| r.model == ModelKind::Qnn).unwrap();
    assert_eq!(qnn.circuit_evals, 2 * 6 * 30 * 5);
    let mut buf = Vec::new();
    a.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("model,n,seed,train_metric,test_metric"));
}
