use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use smoothsvm::{accuracy, parse_libsvm, synthetic_dataset, write_libsvm, LossFamily};
use smoothsvm_cli::{
    cmd_compare, cmd_cv, cmd_sweep_sigma, default_pairs, ExperimentReport, LossSettings, ModelFile, RunConfig,
    SolverKind,
};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/tests/fixtures")
        .join(name)
}

fn smoothsvm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_smoothsvm"))
        .args(args)
        .env_remove("SMOOTHSVM_DATA_DIR")
        .output()
        .unwrap()
}

fn arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Drops every `wall_time_seconds` field (and derived timing summaries).
fn strip_timing(v: &mut Value) {
    match v {
        Value::Object(m) => {
            m.remove("wall_time_seconds");
            m.values_mut().for_each(strip_timing);
        }
        Value::Array(a) => a.iter_mut().for_each(strip_timing),
        _ => {}
    }
}

fn synthetic(n: usize, seed: u64) -> smoothsvm::Dataset {
    synthetic_dataset(n, 30, 8, 0.0, seed).unwrap().dataset
}

#[test]
fn train_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for k in 0..2 {
        let model = dir.path().join(format!("m{k}.json"));
        let report = dir.path().join(format!("r{k}.json"));
        let out = smoothsvm(&[
            "train",
            arg(&fixture("tiny.svm")),
            "--loss",
            "smooth-hinge-m",
            "--lambda",
            "0.1",
            "--model",
            arg(&model),
            "--report",
            arg(&report),
        ]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        let mut r: Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
        strip_timing(&mut r);
        outputs.push((fs::read(&model).unwrap(), serde_json::to_string(&r).unwrap()));
    }
    assert_eq!(outputs[0], outputs[1]);
    let m = ModelFile::load(&dir.path().join("m0.json")).unwrap();
    assert_eq!(
        (m.n_features, m.solver.as_str(), m.loss.family.as_str()),
        (3, "tron", "smooth-hinge-m")
    );
    assert_eq!(m.lambda, 0.1);
}

#[test]
fn tron_with_hinge_is_rejected_before_training() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("m.json");
    let out = smoothsvm(&[
        "train",
        arg(&fixture("tiny.svm")),
        "--loss",
        "hinge",
        "--model",
        arg(&model),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("hinge"));
    assert!(!model.exists());
    // the configuration is checked before the data file is even opened
    let out = smoothsvm(&["train", "missing.svm", "--loss", "hinge", "--model", arg(&model)]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("invalid configuration"));
}

#[test]
fn iteration_cap_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.svm");
    write_libsvm(&synthetic(200, 3), fs::File::create(&data).unwrap()).unwrap();
    let model = dir.path().join("m.json");
    let out = smoothsvm(&[
        "train",
        arg(&data),
        "--tol",
        "1e-14",
        "--max-iter",
        "1",
        "--model",
        arg(&model),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(model.exists());
}

#[test]
fn usage_and_data_errors_exit_with_one() {
    assert_eq!(smoothsvm(&["train", "--no-such-flag"]).status.code(), Some(1));
    assert_eq!(
        smoothsvm(&["cv", arg(&fixture("tiny.svm")), "--solver", "newton"])
            .status
            .code(),
        Some(1)
    );
    let out = smoothsvm(&["cv", arg(&fixture("bad_token.svm"))]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
    assert_eq!(smoothsvm(&["--help"]).status.code(), Some(0));
}

fn write_model(dir: &Path, weights: Vec<f64>) -> PathBuf {
    let path = dir.join("model.json");
    ModelFile::new(&RunConfig::default(), weights)
        .unwrap()
        .save(&path)
        .unwrap();
    path
}

#[test]
fn predict_applies_the_sign_rule() {
    let dir = tempfile::tempdir().unwrap();
    let unit = write_model(dir.path(), vec![1.0, 0.0, 0.0]);
    let out = smoothsvm(&["predict", arg(&fixture("tiny.svm")), "--model", arg(&unit)]);
    assert_eq!(out.status.code(), Some(0));
    // first coordinates are 0.5, absent, 2
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "+1\n-1\n+1\n");

    let zero = write_model(dir.path(), vec![0.0; 3]);
    let out = smoothsvm(&["predict", arg(&fixture("tiny.svm")), "--model", arg(&zero)]);
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "-1\n-1\n-1\n");
}

#[test]
fn narrow_model_drops_extra_features() {
    let dir = tempfile::tempdir().unwrap();
    let model = write_model(dir.path(), vec![1.0, 0.0]);
    let out = smoothsvm(&["predict", arg(&fixture("tiny.svm")), "--model", arg(&model)]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "+1\n-1\n+1\n");
}

#[test]
fn eval_matches_library_accuracy() {
    let dir = tempfile::tempdir().unwrap();
    let w = vec![0.3, -1.0, 0.2];
    let model = write_model(dir.path(), w.clone());
    let out = smoothsvm(&["eval", arg(&fixture("tiny.svm")), "--model", arg(&model)]);
    let printed: f64 = String::from_utf8(out.stdout).unwrap().trim().parse().unwrap();
    let d = parse_libsvm(fs::read(fixture("tiny.svm")).unwrap().as_slice(), Some(3)).unwrap();
    assert_eq!(printed, accuracy(&w, &d).unwrap());
}

#[test]
fn data_dir_resolves_relative_paths() {
    let dir = tempfile::tempdir().unwrap();
    fs::copy(fixture("tiny.svm"), dir.path().join("tiny-copy.svm")).unwrap();
    let model = write_model(dir.path(), vec![1.0, 0.0, 0.0]);
    let out = Command::new(env!("CARGO_BIN_EXE_smoothsvm"))
        .args(["eval", "tiny-copy.svm", "--model", arg(&model)])
        .env("SMOOTHSVM_DATA_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(String::from_utf8(out.stdout).unwrap().trim(), "1");
}

#[test]
fn cv_report_shape_and_determinism() {
    let d = synthetic(120, 5);
    let cfg = RunConfig::default();
    let a = cmd_cv(&cfg, &d).unwrap();
    assert_eq!(a.records().count(), 20);
    let summary = a.blocks[0].summary.as_ref().unwrap();
    let mean = a.records().map(|r| r.accuracy).sum::<f64>() / 20.0;
    assert!((summary.accuracy.mean - mean).abs() <= 1e-12);
    let strip = |r: &ExperimentReport| {
        let mut v = serde_json::to_value(r).unwrap();
        strip_timing(&mut v);
        v
    };
    assert_eq!(strip(&a), strip(&cmd_cv(&cfg, &d).unwrap()));
    let b = cmd_cv(&RunConfig { seed: 9, ..cfg }, &d).unwrap();
    assert_eq!(b.records().count(), 20);
    assert_ne!(strip(&a), strip(&b));
}

#[test]
fn cv_csv_output() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.svm");
    write_libsvm(&synthetic(60, 1), fs::File::create(&data).unwrap()).unwrap();
    let out = smoothsvm(&["cv", arg(&data), "--folds", "3", "--reps", "2", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 7);
    assert!(lines[0].starts_with("solver,loss,sigma,repetition,fold,seed,accuracy"));
    assert!(lines[1].starts_with("tron,smooth-hinge-g,0.5,0,0,"));
}

#[test]
fn single_sigma_sweep_is_a_cv_run() {
    let d = synthetic(100, 2);
    let cfg = RunConfig::default();
    let sweep = cmd_sweep_sigma(&cfg, &d, &[0.5]).unwrap();
    let cv = cmd_cv(&cfg, &d).unwrap();
    let acc = |r: &ExperimentReport| r.records().map(|x| x.accuracy).collect::<Vec<_>>();
    assert_eq!(acc(&sweep), acc(&cv));
    assert!(cmd_sweep_sigma(&cfg, &d, &[]).is_err());
    let sq_hinge = RunConfig {
        loss: LossSettings {
            family: LossFamily::SquaredHinge,
            ..LossSettings::default()
        },
        ..RunConfig::default()
    };
    assert!(cmd_sweep_sigma(&sq_hinge, &d, &[1.0]).is_err());
}

#[test]
fn oversmoothing_hurts_accuracy() {
    let d = synthetic_dataset(400, 30, 8, 0.0, 11).unwrap().dataset;
    let cfg = RunConfig {
        repetitions: 1,
        ..RunConfig::default()
    };
    let r = cmd_sweep_sigma(&cfg, &d, &[0.125, 32.0]).unwrap();
    let mean = |k: usize| r.blocks[k].summary.as_ref().unwrap().accuracy.mean;
    assert!(mean(1) < mean(0), "σ=2^-3: {}, σ=2^5: {}", mean(0), mean(1));
}

#[test]
fn compare_reports_one_block_per_pair() {
    let d = synthetic(100, 4);
    let cfg = RunConfig {
        repetitions: 1,
        ..RunConfig::default()
    };
    let r = cmd_compare(&cfg, &d, &default_pairs()).unwrap();
    assert_eq!(r.blocks.len(), 5);
    for b in &r.blocks {
        assert!(b.warning.is_none());
        assert!(b.summary.as_ref().unwrap().wall_time_seconds.mean > 0.0);
    }
    let pairs = [
        (SolverKind::Tron, LossFamily::Logistic),
        (SolverKind::Tron, LossFamily::Hinge),
        (SolverKind::Pegasos, LossFamily::Hinge),
    ];
    let r = cmd_compare(&cfg, &d, &pairs).unwrap();
    assert_eq!(r.blocks.len(), 3);
    assert!(r.blocks[1].warning.is_some() && r.blocks[1].records.is_empty());
    assert_eq!(r.blocks[2].records.len(), 5);
}

#[test]
fn compare_command_line_pairs() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.svm");
    let report = dir.path().join("r.json");
    write_libsvm(&synthetic(60, 8), fs::File::create(&data).unwrap()).unwrap();
    let out = smoothsvm(&[
        "compare",
        arg(&data),
        "--pairs",
        "tron:logistic,sgd:hinge",
        "--reps",
        "1",
        "--out",
        arg(&report),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r: ExperimentReport = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(r.blocks.len(), 2);
    assert!(r.blocks[1].warning.is_some());
    assert!(String::from_utf8_lossy(&out.stderr).contains("skipped"));
}

#[test]
fn synth_writes_the_benchmark() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("bench.svm");
    let out = smoothsvm(&["synth", "--out", arg(&data)]);
    assert_eq!(out.status.code(), Some(0));
    let d = parse_libsvm(fs::read(&data).unwrap().as_slice(), None).unwrap();
    assert_eq!(d, synthetic_dataset(2000, 100, 20, 0.0, 42).unwrap().dataset);
}
