use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn qntk(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut c = Command::new(env!("CARGO_BIN_EXE_qntk"));
    c.args(args).env_remove("QNTK_THREADS");
    for (k, v) in envs {
        c.env(k, v);
    }
    c.output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p
}

fn run_config(dir: &Path, body: &str, out: &str, extra: &[&str]) -> (Output, PathBuf) {
    let cfg = write_config(dir, &format!("{out}.toml"), body);
    let out_dir = dir.join(out);
    let mut args = vec!["--config", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap()];
    args.extend_from_slice(extra);
    (qntk(&args, &[]), out_dir)
}

fn assert_ok(o: &Output) {
    assert!(o.status.success(), "exit {:?}\nstderr: {}", o.status.code(), String::from_utf8_lossy(&o.stderr));
}

fn data_rows(path: &Path) -> Vec<String> {
    fs::read_to_string(path).unwrap().lines().filter(|l| !l.starts_with('#')).skip(1).map(str::to_string).collect()
}

fn manifest(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

const QCNN: &str = r#"
experiment = "train-qcnn"
seed = 3
[encoder]
ansatz = "Bc"
[kernel]
n0 = 40
[optimizer]
lr = 0.001
steps = 50
[dataset]
kind = "sin"
n_train = 12
n_test = 6
[sweep]
points = 11
"#;

#[test]
fn theory_kernel_on_three_points() {
    let dir = tempfile::tempdir().unwrap();
    let body = r#"
experiment = "theory-kernel"
[encoder]
ansatz = "A"
[kernel]
xi = 0.5
[dataset]
kind = "inline"
points = [[0.1, 0.2], [0.5, -0.3], [0.9, 0.4]]
"#;
    let (o, out) = run_config(dir.path(), body, "tk", &[]);
    assert_ok(&o);
    let rows = data_rows(&out.join("gram.csv"));
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r.split(',').count() == 4));
    let rep: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("pd_report.json")).unwrap()).unwrap();
    assert_eq!(rep["is_pd"], true);
    assert_eq!(rep["n_points"], 3);
}

#[test]
fn duplicate_point_yields_witness() {
    let dir = tempfile::tempdir().unwrap();
    let body = r#"
experiment = "theory-kernel"
[encoder]
ansatz = "B"
[kernel]
xi = 0.5
[dataset]
kind = "inline"
points = [[0.1, 0.2], [0.5, -0.3], [0.1, 0.2]]
"#;
    let (o, out) = run_config(dir.path(), body, "dup", &[]);
    assert_ok(&o);
    let rep: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("pd_report.json")).unwrap()).unwrap();
    assert_eq!(rep["is_pd"], false);
    assert_eq!(rep["witness"]["condition_i"], true);
}

#[test]
fn zero_steps_gives_single_row_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let (o, out) = run_config(dir.path(), QCNN, "zero", &["--override", "optimizer.steps=0"]);
    assert_ok(&o);
    assert_eq!(data_rows(&out.join("trajectory.csv")).len(), 1);
    assert_eq!(data_rows(&out.join("theory.csv")).len(), 1);
}

#[test]
fn same_seed_reproduces_artifacts_byte_for_byte() {
    let dir = tempfile::tempdir().unwrap();
    let (a, da) = run_config(dir.path(), QCNN, "a", &[]);
    let (b, db) = run_config(dir.path(), QCNN, "b", &[]);
    let (c, dc) = run_config(dir.path(), QCNN, "c", &["--seed", "4"]);
    assert_ok(&a);
    assert_ok(&b);
    assert_ok(&c);
    for f in ["trajectory.csv", "theory.csv", "predictions.csv"] {
        assert_eq!(fs::read(da.join(f)).unwrap(), fs::read(db.join(f)).unwrap(), "{f}");
    }
    assert_ne!(fs::read(da.join("trajectory.csv")).unwrap(), fs::read(dc.join("trajectory.csv")).unwrap());
}

#[test]
fn manifest_echoes_resolved_config() {
    let dir = tempfile::tempdir().unwrap();
    let (o, out) = run_config(dir.path(), QCNN, "m", &["--override", "kernel.n0=30"]);
    assert_ok(&o);
    let m = manifest(&out);
    assert_eq!(m["experiment"], "train-qcnn");
    assert_eq!(m["seed"], 3);
    assert!(m["wall_time_s"].as_f64().unwrap() >= 0.0);
    assert!(m["derived_seeds"]["model"].is_u64());
    let cfg = m["config"].as_str().unwrap();
    assert!(cfg.contains("n0 = 30"));
    assert_eq!(fs::read_to_string(out.join("config.toml")).unwrap(), cfg);
    let arts: Vec<&str> = m["artifacts"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
    assert_eq!(arts, ["trajectory.csv", "theory.csv", "predictions.csv"]);
    assert_eq!(m["summary"]["n_params"], 30);
}

fn heart_like_csv(path: &Path, rows: usize) {
    let mut s: String = (1..=12).map(|i| format!("f{i},")).collect::<String>() + "label\n";
    for r in 0..rows {
        for c in 0..12 {
            let v = ((r * 7 + c * 13) % 17) as f64 + 0.1 * c as f64;
            s.push_str(&format!("{v},"));
        }
        s.push_str(if r % 2 == 0 { "1\n" } else { "0\n" });
    }
    fs::write(path, s).unwrap();
}

#[test]
fn locality_sweep_emits_one_curve_per_m() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("heart.csv");
    heart_like_csv(&csv, 16);
    let body = format!(
        r#"
experiment = "locality-sweep"
[kernel]
xi = 0.0
[optimizer]
lr = 0.01
steps = 500
[dataset]
kind = "csv"
path = "{}"
n_features = 12
n_train = 16
[sweep]
points = 21
"#,
        csv.display()
    );
    let (o, out) = run_config(dir.path(), &body, "loc", &[]);
    assert_ok(&o);
    for m in [1, 2, 3, 4, 6] {
        let rows = data_rows(&out.join(format!("theory_m{m}.csv")));
        assert_eq!(rows.len(), 21);
        let costs: Vec<f64> = rows.iter().map(|r| r.split(',').nth(1).unwrap().parse().unwrap()).collect();
        assert!(costs.windows(2).all(|w| w[1] <= w[0] + 1e-12));
    }
    assert_eq!(data_rows(&out.join("locality_summary.csv")).len(), 5);
}

#[test]
fn plotdata_is_idempotent_and_long_format() {
    let dir = tempfile::tempdir().unwrap();
    let (o, out) = run_config(dir.path(), QCNN, "p", &[]);
    assert_ok(&o);
    assert_ok(&qntk(&["plotdata", out.to_str().unwrap()], &[]));
    let first = fs::read(out.join("plotdata/cost.csv")).unwrap();
    assert_ok(&qntk(&["plotdata", out.to_str().unwrap()], &[]));
    assert_eq!(fs::read(out.join("plotdata/cost.csv")).unwrap(), first);
    let text = String::from_utf8(first).unwrap();
    assert!(text.starts_with("series,x,y\nsimulation,0,"));
    assert!(text.contains("\ntheory,0,"));
    let sim = text.lines().filter(|l| l.starts_with("simulation,")).count();
    assert_eq!(sim, 51);
}

#[test]
fn compare_plot_groups_series_by_model() {
    let dir = tempfile::tempdir().unwrap();
    let body = r#"
experiment = "compare"
[compare]
task = "regression"
n_values = [2]
seeds = [0, 1]
n_train = 10
n_test = 5
n0 = 10
qnn_layers = 1
qcnn_steps = 5
cnn_steps = 5
qnn_steps = 2
"#;
    let (o, out) = run_config(dir.path(), body, "cmp", &[]);
    assert_ok(&o);
    assert_eq!(data_rows(&out.join("report.csv")).len(), 6);
    assert_ok(&qntk(&["plotdata", out.to_str().unwrap()], &[]));
    let rows = data_rows(&out.join("plotdata/compare.csv"));
    for model in ["qcnn", "qnn", "cnn"] {
        assert_eq!(rows.iter().filter(|r| r.starts_with(&format!("{model},2,"))).count(), 2);
    }
}

#[test]
fn shot_sweep_and_width_sweep_run() {
    let dir = tempfile::tempdir().unwrap();
    let shots = r#"
experiment = "shot-sweep"
[kernel]
n0 = 20
[optimizer]
kind = "adam"
lr = 0.01
steps = 20
[dataset]
kind = "quantum"
n_train = 10
n_test = 8
[sweep]
shots = [100, 10000]
"#;
    let (o, out) = run_config(dir.path(), shots, "shots", &[]);
    assert_ok(&o);
    let rows = data_rows(&out.join("shots.csv"));
    assert_eq!(rows.len(), 2);
    let dev: Vec<f64> = rows.iter().map(|r| r.split(',').nth(2).unwrap().parse().unwrap()).collect();
    assert!(dev[1] < dev[0]);

    let conv = r#"
experiment = "ntk-convergence"
[encoder]
ansatz = "Bc"
[kernel]
xi = 0.0
[dataset]
kind = "sin"
n_train = 6
[sweep]
n0_values = [10, 1000]
seeds = [0, 1]
"#;
    let (o, out) = run_config(dir.path(), conv, "conv", &[]);
    assert_ok(&o);
    assert_eq!(data_rows(&out.join("convergence.csv")).len(), 4);
}

#[test]
fn qnn_and_cnn_runs_report_parameter_counts() {
    let dir = tempfile::tempdir().unwrap();
    let body = r#"
experiment = "train-qnn"
[encoder]
n = 2
qnn_layers = 2
[optimizer]
kind = "adam"
lr = 0.01
steps = 3
[dataset]
kind = "quantum"
n_train = 5
n_test = 3
"#;
    let (o, out) = run_config(dir.path(), body, "qnn", &[]);
    assert_ok(&o);
    assert_eq!(manifest(&out)["summary"]["n_params"], 12);
    assert_eq!(manifest(&out)["summary"]["circuit_evaluations"], 2 * 12 * 5 * 3);

    let (o, out) = run_config(dir.path(), body, "cnn", &["--override", "experiment=train-cnn", "--override", "kernel.n0=7"]);
    assert_ok(&o);
    assert_eq!(manifest(&out)["summary"]["n_params"], 4 * 7);
}

#[test]
fn config_errors_exit_2_with_field_path() {
    let dir = tempfile::tempdir().unwrap();
    let (o, _) = run_config(dir.path(), "experiment = \"train-qcnn\"\n[kernel]\nwidth = 4\n", "bad", &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("kernel"));

    let (o, _) = run_config(dir.path(), "experiment = \"fly\"\n", "bad2", &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("experiment"));

    let (o, _) = run_config(dir.path(), QCNN, "bad3", &["--override", "optimizer.lr=-1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("optimizer.lr"));

    assert_eq!(qntk(&["--config", dir.path().join("missing.toml").to_str().unwrap()], &[]).status.code(), Some(2));
    assert_eq!(qntk(&[], &[]).status.code(), Some(2));
}

#[test]
fn divergence_exits_3_naming_the_step() {
    let dir = tempfile::tempdir().unwrap();
    let body = r#"
experiment = "train-cnn"
[kernel]
n0 = 5
[optimizer]
lr = 1e200
steps = 20
[dataset]
kind = "sin"
n_train = 10
"#;
    let (o, _) = run_config(dir.path(), body, "div", &[]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("step"));
}

#[test]
fn thread_variable_is_honoured() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "t.toml", QCNN);
    let out = dir.path().join("t");
    let o = qntk(&["run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()], &[("QNTK_THREADS", "1")]);
    assert_ok(&o);
    assert_eq!(manifest(&out)["threads"], 1);
    let o = qntk(&["--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()], &[("QNTK_THREADS", "zero")]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn plotdata_rejects_missing_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    assert_ne!(qntk(&["plotdata", dir.path().to_str().unwrap()], &[]).status.code(), Some(0));
    let (o, out) = run_config(dir.path(), QCNN, "gone", &[]);
    assert_ok(&o);
    fs::remove_file(out.join("theory.csv")).unwrap();
    let o = qntk(&["plotdata", out.to_str().unwrap()], &[]);
    assert_ne!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stderr).contains("theory.csv"));
}
