//! One function per experiment. Each writes its CSV artifacts into the run
//! directory and returns a JSON summary that lands in the manifest.

use nalgebra::DMatrix;
use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use qntk::data::{gen_adhoc_substitute, gen_hard_sin, gen_quantum_data, gen_sin, load_csv_classification, split, Dataset, Provenance, QuantumDataConfig, Task, SIN_NOISE_SD};
use qntk::dynamics::{bce_trajectory, diagonalize, Trajectory};
use qntk::kernel::{empirical_ntk, pd_check, InputKind, KernelConfig, KernelKind, KernelMatrix, KernelMeta};
use qntk::models::{accuracy, compare_models, rmse, CnnModel, QcnnModel, QnnModel};
use qntk::nn::{Activation, Batch, Loss, NetworkConfig, NetworkState, Optimizer, TrainLog};
use qntk::qsim::{default_local_observable, feature_matrix, window_states, EncoderSpec, RandomMeasurement, Shots};
use qntk::rng::derive_seed;

use crate::config::{DatasetKind, Experiment, InputMode, OptimizerName, RunConfig};
use crate::error::CliError;

const TAG_TRAIN: u64 = 0x5452_4149;
const TAG_TEST: u64 = 0x5445_5354;
const TAG_MODEL: u64 = 0x4D4F_444C;
const TAG_SHOTS: u64 = 0x5348_4F54;
const TAG_MEAS: u64 = 0x4D45_4153;
const TAG_MC: u64 = 0x4D43_4D43;

/// Files written into the run directory, in creation order.
pub struct Artifacts {
    dir: PathBuf,
    pub files: Vec<String>,
    pub seeds: BTreeMap<String, u64>,
}

impl Artifacts {
    pub fn new(dir: &Path) -> Self {
        Self { dir: dir.to_path_buf(), files: Vec::new(), seeds: BTreeMap::new() }
    }

    fn create(&mut self, name: &str) -> Result<BufWriter<File>, CliError> {
        self.files.push(name.to_string());
        Ok(BufWriter::new(File::create(self.dir.join(name))?))
    }

    fn seed(&mut self, name: &str, base: u64, tags: &[u64]) -> u64 {
        let s = derive_seed(base, tags);
        self.seeds.insert(name.to_string(), s);
        s
    }
}

pub fn run(cfg: &RunConfig, art: &mut Artifacts) -> Result<Value, CliError> {
    match cfg.experiment {
        Experiment::TheoryKernel => theory_kernel(cfg, art),
        Experiment::TrainQcnn => train_qcnn(cfg, art),
        Experiment::TrainQnn => train_qnn(cfg, art),
        Experiment::TrainCnn => train_cnn(cfg, art),
        Experiment::Compare => compare(cfg, art),
        Experiment::LocalitySweep => locality_sweep(cfg, art),
        Experiment::ShotSweep => shot_sweep(cfg, art),
        Experiment::NtkConvergence => ntk_convergence(cfg, art),
    }
}

struct Prepared {
    train: Dataset,
    test: Option<Dataset>,
    task: Task,
    encoder: EncoderSpec,
}

fn prepare(cfg: &RunConfig, art: &mut Artifacts) -> Result<Prepared, CliError> {
    let d = &cfg.dataset;
    let s_train = art.seed("data_train", cfg.seed, &[TAG_TRAIN]);
    let s_test = art.seed("data_test", cfg.seed, &[TAG_TEST]);
    let noise = d.noise_sd.unwrap_or(SIN_NOISE_SD);
    let with_test = |gen: &dyn Fn(usize, u64) -> qntk::Result<Dataset>| -> Result<(Dataset, Option<Dataset>), CliError> {
        let train = gen(d.n_train, s_train)?;
        let test = if d.n_test > 0 { Some(gen(d.n_test, s_test)?) } else { None };
        Ok((train, test))
    };
    let (train, test, task, quantum_encoder) = match d.kind {
        DatasetKind::Sin => {
            let (tr, te) = with_test(&|n, s| gen_sin(n, noise, s))?;
            (tr, te, Task::Regression, None)
        }
        DatasetKind::HardSin => {
            let (tr, te) = with_test(&|n, s| gen_hard_sin(n, s))?;
            (tr, te, Task::Regression, None)
        }
        DatasetKind::Adhoc => {
            let (tr, te) = with_test(&|n, s| gen_adhoc_substitute(n.div_ceil(2), s))?;
            (tr, te, Task::Classification, None)
        }
        DatasetKind::Quantum => {
            let task = d.task.unwrap_or(Task::Regression);
            let mut q = QuantumDataConfig::new(cfg.encoder.n.unwrap_or(2), d.n_train, d.n_test.max(1), task);
            if let Some(o) = d.observable {
                q.observable = o;
            }
            if let Some(sd) = d.noise_sd {
                q.noise_sd = sd;
            }
            q.threshold = d.threshold;
            let qd = gen_quantum_data(&q, s_train)?;
            let test = (d.n_test > 0).then_some(qd.test);
            (qd.train, test, task, Some(qd.encoder))
        }
        DatasetKind::Csv => {
            let path = d.path.as_ref().expect("validated");
            if !path.exists() {
                return Err(CliError::Config(format!("field 'dataset.path': {} does not exist", path.display())));
            }
            let all = load_csv_classification(path, d.n_features.expect("validated"), (d.interval[0], d.interval[1]))?;
            let (mut tr, te) = if d.n_test > 0 {
                let (a, b) = split(&all, d.n_test, s_test)?;
                (a, Some(b))
            } else {
                (all, None)
            };
            if d.n_train < tr.len() {
                let idx: Vec<usize> = (0..d.n_train).collect();
                tr = tr.subset(&idx, qntk::data::Split::Train);
            }
            (tr, te, Task::Classification, None)
        }
        DatasetKind::Inline => {
            let points = d.points.clone().expect("validated");
            let labels = d.labels.clone().unwrap_or_else(|| vec![0.0; points.len()]);
            let prov = Provenance { generator: "inline".into(), seed: 0, params: Value::Null };
            (Dataset::new(points, labels, prov)?, None, d.task.unwrap_or(Task::Regression), None)
        }
    };
    let dim = train.dim();
    let encoder = match quantum_encoder {
        Some(e) => e,
        None => {
            if let Some(n) = cfg.encoder.n {
                if n != dim {
                    return Err(CliError::Config(format!("field 'encoder.n': {n} qubits for {dim}-dimensional inputs")));
                }
            }
            let e = EncoderSpec::new(cfg.encoder.ansatz, dim)?;
            match cfg.encoder.depth_repeats {
                Some(r) => e.with_depth(r)?,
                None => e,
            }
        }
    };
    Ok(Prepared { train, test, task, encoder })
}

fn optimizer(cfg: &RunConfig) -> Result<Optimizer, CliError> {
    Ok(match cfg.optimizer.kind {
        OptimizerName::Sgd => Optimizer::sgd(cfg.optimizer.lr)?,
        OptimizerName::Adam => Optimizer::adam(cfg.optimizer.lr)?,
    })
}

fn trace_sq(m: usize) -> f64 {
    default_local_observable(m).iter().map(|z| z.norm_sqr()).sum()
}

fn kernel_config(cfg: &RunConfig, encoder: &EncoderSpec, m: usize, dim: usize, mc_seed: u64) -> Result<KernelConfig, CliError> {
    let k = &cfg.kernel;
    let input = match k.input {
        InputMode::Quantum => InputKind::Quantum { m, trace_o_sq: trace_sq(m), encoder: encoder.clone() },
        InputMode::Classical => InputKind::Classical { n0: dim },
    };
    let mut kc = KernelConfig::new(k.layers, k.xi, k.activation, input)?;
    kc.mc_seed = mc_seed;
    Ok(kc)
}

/// `points` evenly spaced times on `[0, steps]`.
fn time_grid(steps: usize, points: usize) -> Vec<f64> {
    if steps == 0 {
        return vec![0.0];
    }
    (0..points).map(|i| steps as f64 * i as f64 / (points - 1) as f64).collect()
}

fn check_finite(traj: &Trajectory, what: &str) -> Result<(), CliError> {
    match traj.cost.iter().position(|c| !c.is_finite()) {
        Some(i) => Err(CliError::Divergence(format!("{what} cost non-finite at t = {}", traj.times[i]))),
        None => Ok(()),
    }
}

fn theory_curve(k: &DMatrix<f64>, y: &[f64], f0: &[f64], loss: Loss, eta: f64, steps: usize, points: usize) -> Result<Trajectory, CliError> {
    let traj = match loss {
        Loss::Mse => diagonalize(k, y, f0)?.mse_trajectory(eta, &time_grid(steps, points))?,
        Loss::Bce => bce_trajectory(k, y, f0, eta, None, steps as f64)?,
    };
    check_finite(&traj, "theory")?;
    Ok(traj)
}

fn metric(task: Task, pred: &[f64], y: &[f64]) -> f64 {
    match task {
        Task::Regression => rmse(pred, y),
        Task::Classification => accuracy(pred, y),
    }
}

fn metric_name(task: Task) -> &'static str {
    match task {
        Task::Regression => "rmse",
        Task::Classification => "accuracy",
    }
}

fn loss_of(task: Task) -> Loss {
    match task {
        Task::Regression => Loss::Mse,
        Task::Classification => Loss::Bce,
    }
}

fn write_predictions(art: &mut Artifacts, sets: &[(&str, &Dataset, &[f64])]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(art.create("predictions.csv")?);
    w.write_record(["split", "index", "label", "prediction"])?;
    for (name, data, pred) in sets {
        for (a, (y, p)) in data.labels.iter().zip(pred.iter()).enumerate() {
            w.write_record([name.to_string(), a.to_string(), y.to_string(), p.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

fn write_log(art: &mut Artifacts, log: &TrainLog) -> Result<(), CliError> {
    let w = art.create("trajectory.csv")?;
    log.write_csv(w)?;
    Ok(())
}

fn training_summary(task: Task, log: &TrainLog, data: &Prepared, train_pred: &[f64], test_pred: Option<&[f64]>) -> Value {
    json!({
        "task": task,
        "metric": metric_name(task),
        "initial_cost": log.cost[0],
        "final_cost": log.final_cost(),
        "steps": log.cost.len() - 1,
        "train_metric": metric(task, train_pred, &data.train.labels),
        "test_metric": test_pred.zip(data.test.as_ref()).map(|(p, t)| metric(task, p, &t.labels)),
    })
}

fn theory_kernel(cfg: &RunConfig, art: &mut Artifacts) -> Result<Value, CliError> {
    let data = prepare(cfg, art)?;
    let xs = &data.train.inputs;
    let mc = art.seed("kernel_mc", cfg.seed, &[TAG_MC]);
    let kc = kernel_config(cfg, &data.encoder, cfg.kernel.m, data.train.dim(), mc)?;
    let sigma1 = kc.first_layer(xs)?;
    let theta = kc.ntk(xs)?;
    let quantum = kc.is_quantum();
    let meta = KernelMeta {
        layers: cfg.kernel.layers,
        xi: cfg.kernel.xi,
        activation: cfg.kernel.activation.name().into(),
        encoder_hash: quantum.then(|| data.encoder.hash()),
    };
    let (k1, kt) = if quantum { (KernelKind::SigmaQ, KernelKind::ThetaQ) } else { (KernelKind::Sigma, KernelKind::Theta) };
    KernelMatrix::new(k1, sigma1, meta.clone()).write_csv(art.create("sigma1.csv")?)?;
    KernelMatrix::new(kt, theta.clone(), meta).write_csv(art.create("gram.csv")?)?;

    let windows = if quantum { Some(window_states(xs, &data.encoder, cfg.kernel.m)?) } else { None };
    let rep = pd_check(&theta, windows.as_deref(), cfg.kernel.xi, cfg.kernel.pd_tol);
    let mut eig: Vec<f64> = theta.symmetric_eigenvalues().iter().copied().collect();
    eig.sort_by(|a, b| b.total_cmp(a));
    let mut w = csv::Writer::from_writer(art.create("eigenvalues.csv")?);
    w.write_record(["index", "eigenvalue"])?;
    for (j, l) in eig.iter().enumerate() {
        w.write_record([j.to_string(), l.to_string()])?;
    }
    w.flush()?;
    let report = json!({
        "n_points": xs.len(),
        "is_pd": rep.is_pd,
        "min_eigenvalue": rep.min_eigenvalue,
        "max_eigenvalue": rep.max_eigenvalue,
        "tolerance": rep.tol,
        "witness": rep.witness.as_ref().map(|wt| json!({
            "coefficients": wt.coefficients,
            "condition_i": wt.condition_i,
            "condition_ii": wt.condition_ii,
        })),
    });
    let mut f = art.create("pd_report.json")?;
    serde_json::to_writer_pretty(&mut f, &report).map_err(|e| CliError::Runtime(e.to_string()))?;
    writeln!(f)?;
    Ok(report)
}

fn train_qcnn(cfg: &RunConfig, art: &mut Artifacts) -> Result<Value, CliError> {
    let data = prepare(cfg, art)?;
    let k = &cfg.kernel;
    let seed = art.seed("model", cfg.seed, &[TAG_MODEL]);
    let mut model = QcnnModel::build(data.encoder.clone(), k.m, k.n0, data.task, k.xi, k.init, seed)?;
    let feats = model.features(&data.train.inputs, None)?;
    let f0 = model.head.forward_batch(&feats)?;
    let mut opt = optimizer(cfg)?;
    let steps = cfg.optimizer.steps;
    let log = model.train_on_features(&feats, &data.train.labels, &mut opt, steps, cfg.optimizer.batch)?;
    write_log(art, &log)?;

    // The closed-form curve describes full-batch gradient descent only.
    let plain_gd = cfg.optimizer.kind == OptimizerName::Sgd && cfg.optimizer.batch == Batch::Full;
    if plain_gd {
        let windows = window_states(&data.train.inputs, &data.encoder, k.m)?;
        let theta = qntk::kernel::quantum_first_layer(&windows, model.measurement.local_trace_sq(), k.xi)?;
        let loss = cfg.optimizer.loss.unwrap_or(loss_of(data.task));
        let traj = theory_curve(&theta, &data.train.labels, &f0, loss, cfg.optimizer.lr, steps, cfg.sweep.points)?;
        traj.write_csv(art.create("theory.csv")?)?;
    }

    let train_pred: Vec<f64> = feats.row_iter().map(|r| model.predict_features(&r.iter().copied().collect::<Vec<_>>())).collect::<qntk::Result<_>>()?;
    let test_pred = match &data.test {
        Some(t) => Some(model.predict_batch(&t.inputs, None)?),
        None => None,
    };
    let mut sets: Vec<(&str, &Dataset, &[f64])> = vec![("train", &data.train, &train_pred)];
    if let (Some(t), Some(p)) = (&data.test, &test_pred) {
        sets.push(("test", t, p));
    }
    write_predictions(art, &sets)?;
    let mut s = training_summary(data.task, &log, &data, &train_pred, test_pred.as_deref());
    s["n_params"] = json!(model.num_params());
    s["circuit_evaluations"] = json!(model.circuit_evaluations());
    s["theory"] = json!(plain_gd);
    Ok(s)
}

fn train_qnn(cfg: &RunConfig, art: &mut Artifacts) -> Result<Value, CliError> {
    let data = prepare(cfg, art)?;
    let seed = art.seed("model", cfg.seed, &[TAG_MODEL]);
    let mut model = QnnModel::new(data.encoder.clone(), cfg.encoder.qnn_layers, data.task, seed)?;
    let mut opt = optimizer(cfg)?;
    let log = model.train(&data.train, &mut opt, cfg.optimizer.steps)?;
    write_log(art, &log)?;
    let predict = |d: &Dataset| d.inputs.iter().map(|x| model.predict(x)).collect::<qntk::Result<Vec<f64>>>();
    let train_pred = predict(&data.train)?;
    let test_pred = data.test.as_ref().map(&predict).transpose()?;
    let mut sets: Vec<(&str, &Dataset, &[f64])> = vec![("train", &data.train, &train_pred)];
    if let (Some(t), Some(p)) = (&data.test, &test_pred) {
        sets.push(("test", t, p));
    }
    write_predictions(art, &sets)?;
    let mut s = training_summary(data.task, &log, &data, &train_pred, test_pred.as_deref());
    s["n_params"] = json!(model.num_params());
    s["circuit_evaluations"] = json!(model.circuit_evaluations());
    Ok(s)
}

fn train_cnn(cfg: &RunConfig, art: &mut Artifacts) -> Result<Value, CliError> {
    let data = prepare(cfg, art)?;
    let k = &cfg.kernel;
    let seed = art.seed("model", cfg.seed, &[TAG_MODEL]);
    let mut model = CnnModel::new(data.train.dim(), k.n0, data.task, k.xi, k.init, seed)?;
    let mut opt = optimizer(cfg)?;
    let log = model.train(&data.train, &mut opt, cfg.optimizer.steps, cfg.optimizer.batch)?;
    write_log(art, &log)?;
    let train_pred = model.predict_batch(&data.train.inputs)?;
    let test_pred = data.test.as_ref().map(|t| model.predict_batch(&t.inputs)).transpose()?;
    let mut sets: Vec<(&str, &Dataset, &[f64])> = vec![("train", &data.train, &train_pred)];
    if let (Some(t), Some(p)) = (&data.test, &test_pred) {
        sets.push(("test", t, p));
    }
    write_predictions(art, &sets)?;
    let mut s = training_summary(data.task, &log, &data, &train_pred, test_pred.as_deref());
    s["n_params"] = json!(model.num_params());
    Ok(s)
}

fn compare(cfg: &RunConfig, art: &mut Artifacts) -> Result<Value, CliError> {
    let mut cc = cfg.compare.clone().expect("validated");
    // the run seed shifts the whole seed list
    cc.seeds = cc.seeds.iter().map(|s| s.wrapping_add(cfg.seed)).collect();
    let report = compare_models(&cc)?;
    report.write_csv(art.create("report.csv")?)?;
    report.write_summary_csv(art.create("summary.csv")?)?;
    Ok(json!({
        "task": cc.task,
        "seeds": cc.seeds,
        "summary": report.summary().iter().map(|r| json!({
            "model": r.model, "n": r.n, "test_median": r.test_median, "test_mean": r.test_mean,
        })).collect::<Vec<_>>(),
    }))
}

fn locality_sweep(cfg: &RunConfig, art: &mut Artifacts) -> Result<Value, CliError> {
    let data = prepare(cfg, art)?;
    let n = data.encoder.n;
    if let Some(m) = cfg.sweep.m_values.iter().find(|&&m| m == 0 || n % m != 0) {
        return Err(CliError::Config(format!("field 'sweep.m_values': locality {m} does not divide {n} qubits")));
    }
    let loss = cfg.optimizer.loss.unwrap_or(Loss::Mse);
    if loss == Loss::Bce && data.train.labels.iter().any(|&y| y != 0.0 && y != 1.0) {
        return Err(CliError::Config("field 'optimizer.loss': cross-entropy needs 0/1 labels".into()));
    }
    let mc = art.seed("kernel_mc", cfg.seed, &[TAG_MC]);
    let y = &data.train.labels;
    let f0 = vec![0.0; y.len()];
    let mut rows = Vec::new();
    let mut summary = csv::Writer::from_writer(art.create("locality_summary.csv")?);
    summary.write_record(["m", "lambda_max", "lambda_min", "final_cost"])?;
    for &m in &cfg.sweep.m_values {
        let mut kcfg = cfg.clone();
        kcfg.kernel.input = InputMode::Quantum;
        let kc = kernel_config(&kcfg, &data.encoder, m, n, mc)?;
        let theta = kc.ntk(&data.train.inputs)?;
        let traj = theory_curve(&theta, y, &f0, loss, cfg.optimizer.lr, cfg.optimizer.steps, cfg.sweep.points)?;
        traj.write_csv(art.create(&format!("theory_m{m}.csv"))?)?;
        let model = diagonalize(&theta, y, &f0)?;
        let mut w = csv::Writer::from_writer(art.create(&format!("eigen_m{m}.csv"))?);
        w.write_record(["index", "eigenvalue"])?;
        for (j, l) in model.eigenvalues.iter().enumerate() {
            w.write_record([j.to_string(), l.to_string()])?;
        }
        w.flush()?;
        let last = *traj.cost.last().expect("non-empty trajectory");
        summary.write_record([m.to_string(), model.lambda_max().to_string(), model.lambda_min().to_string(), last.to_string()])?;
        rows.push(json!({ "m": m, "lambda_max": model.lambda_max(), "lambda_min": model.lambda_min(), "final_cost": last }));
    }
    summary.flush()?;
    Ok(json!({ "loss": loss, "qubits": n, "curves": rows }))
}

/// Least-squares slope of `ln y` against `ln x`.
fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

fn shot_sweep(cfg: &RunConfig, art: &mut Artifacts) -> Result<Value, CliError> {
    let data = prepare(cfg, art)?;
    let k = &cfg.kernel;
    let seed = art.seed("model", cfg.seed, &[TAG_MODEL]);
    let shot_seed = art.seed("shots", cfg.seed, &[TAG_SHOTS]);
    let mut model = QcnnModel::build(data.encoder.clone(), k.m, k.n0, data.task, k.xi, k.init, seed)?;
    let mut opt = optimizer(cfg)?;
    let trained = model.train(&data.train, &mut opt, cfg.optimizer.steps, cfg.optimizer.batch, None)?;
    write_log(art, &trained.log)?;
    let test = data.test.as_ref().expect("validated");
    let exact = model.predict_batch(&test.inputs, None)?;
    let exact_metric = metric(data.task, &exact, &test.labels);
    let mut w = csv::Writer::from_writer(art.create("shots.csv")?);
    w.write_record(["shots", metric_name(data.task), "rmse_vs_exact"])?;
    let mut dev = Vec::new();
    for &s in &cfg.sweep.shots {
        let p = model.predict_batch(&test.inputs, Some(Shots { n_shots: s, seed: derive_seed(shot_seed, &[s]) }))?;
        let d = rmse(&p, &exact);
        dev.push(d);
        w.write_record([s.to_string(), metric(data.task, &p, &test.labels).to_string(), d.to_string()])?;
    }
    w.flush()?;
    let shots: Vec<f64> = cfg.sweep.shots.iter().map(|&s| s as f64).collect();
    let slope = if shots.len() >= 2 && dev.iter().all(|&d| d > 0.0) { Some(loglog_slope(&shots, &dev)) } else { None };
    Ok(json!({
        "metric": metric_name(data.task),
        "exact_test_metric": exact_metric,
        "loglog_slope_vs_exact": slope,
        "circuit_evaluations": model.circuit_evaluations(),
    }))
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    if v.len() % 2 == 1 {
        v[mid]
    } else {
        0.5 * (v[mid - 1] + v[mid])
    }
}

fn ntk_convergence(cfg: &RunConfig, art: &mut Artifacts) -> Result<Value, CliError> {
    let data = prepare(cfg, art)?;
    let k = &cfg.kernel;
    let (n, m) = (data.encoder.n, k.m);
    let xs = &data.train.inputs;
    let windows = window_states(xs, &data.encoder, m)?;
    let theory = qntk::kernel::quantum_first_layer(&windows, trace_sq(m), k.xi)?;
    let base = art.seed("measurements", cfg.seed, &[TAG_MEAS]);
    let mut w = csv::Writer::from_writer(art.create("convergence.csv")?);
    w.write_record(["n0", "seed", "rel_error"])?;
    let mut medians = Vec::new();
    for &n0 in &cfg.sweep.n0_values {
        let mut errs = Vec::new();
        for &s in &cfg.sweep.seeds {
            let meas = RandomMeasurement::sample(n, m, n0, None, derive_seed(base, &[n0 as u64, s]))?;
            let f = feature_matrix(xs, &data.encoder, &meas, None)?;
            let head_cfg = NetworkConfig::new(vec![n0, 1], k.xi, Activation::Identity)?.with_init(k.init);
            let head = NetworkState::init(head_cfg, derive_seed(base, &[n0 as u64, s, 1]))?;
            let emp = empirical_ntk(&head, &f)?.entries;
            let e = (emp - &theory).norm() / theory.norm();
            w.write_record([n0.to_string(), s.to_string(), e.to_string()])?;
            errs.push(e);
        }
        medians.push(json!({ "n0": n0, "median_rel_error": median(&mut errs) }));
    }
    w.flush()?;
    Ok(json!({ "medians": medians }))
}
