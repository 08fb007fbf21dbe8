use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use abl_core::datasets::{self, DatasetSpec, Semantics};
use abl_core::equation::OpRuleSet;
use abl_core::neural::{Network, NetworkSpec, Tensor, TrainConfig};
use abl_core::perception::{GlyphFamilySpec, PerceptionModel};
use abl_core::trainer::{save_model, AbductiveModel, RelationalFeature, TrainerConfig};

fn abl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_abl"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn gen_small(dir: &Path, seed: &str) -> Output {
    abl(&[
        "gen-data",
        "--semantics",
        "add",
        "--glyphs",
        "easy",
        "--lengths",
        "5..6",
        "--per-length",
        "20",
        "--seed",
        seed,
        "--out",
        path(dir),
    ])
}

fn read_eval(path: &Path) -> Vec<(String, usize, f64)> {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("length,n,accuracy,stderr"));
    lines
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].to_string(), f[1].parse().unwrap(), f[2].parse().unwrap())
        })
        .collect()
}

fn one_feature(rules: OpRuleSet) -> Vec<RelationalFeature> {
    vec![RelationalFeature {
        rules,
        created_at_iteration: 0,
        source_consistency: 1,
    }]
}

/// A decision net that copies its single input bit.
fn identity_decision() -> Network {
    let mut net = Network::new(NetworkSpec::decision(1, 3)).unwrap();
    let x = Tensor::from_rows(&[vec![0.0], vec![1.0]], &[1]).unwrap();
    let cfg = TrainConfig {
        learning_rate: 0.5,
        epochs: 300,
        minibatch: 2,
        seed: 0,
        l2: 0.0,
    };
    net.fit(&x, &[0, 1], &cfg).unwrap();
    assert_eq!(net.accuracy(&x, &[0, 1]).unwrap(), 1.0);
    net
}

#[test]
fn gen_data_is_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert_eq!(code(&gen_small(&a, "7")), 0);
    assert_eq!(code(&gen_small(&b, "7")), 0);
    for f in ["images.bin", "labels.bin", "truth.sidecar", "manifest.json"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    let manifest: serde_json::Value = serde_json::from_slice(&fs::read(a.join("run.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "gen-data");
    assert_eq!(manifest["seeds"]["seed"], 7);
    assert_eq!(manifest["checksums"].as_object().unwrap().len(), 4);
    let data = datasets::load(&a).unwrap();
    assert_eq!(data.len(), 40);
}

#[test]
fn validation_errors_exit_with_one() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("x");
    let short = abl(&["gen-data", "--lengths", "4..5", "--out", path(&out)]);
    assert_eq!(code(&short), 1);
    assert!(!out.join("images.bin").exists());
    assert_eq!(code(&abl(&["gen-data", "--semantics", "mul", "--out", path(&out)])), 1);
    assert_eq!(code(&abl(&["train", "--out", path(&out)])), 1);
    assert_eq!(code(&abl(&["train", "--data", path(&out), "--out", path(&out)])), 1);
    assert_eq!(code(&abl(&["--help"])), 0);
    let threads = Command::new(env!("CARGO_BIN_EXE_abl"))
        .args(["gen-data", "--out", path(&out)])
        .env("ABL_THREADS", "0")
        .output()
        .unwrap();
    assert_eq!(code(&threads), 1);
}

#[test]
fn unsatisfiable_length_is_a_runtime_failure() {
    let tmp = tempfile::tempdir().unwrap();
    let out = abl(&[
        "gen-data",
        "--semantics",
        "xor",
        "--lengths",
        "6",
        "--per-length",
        "2",
        "--out",
        path(&tmp.path().join("x")),
    ]);
    assert_eq!(code(&out), 2);
}

#[test]
fn eval_majority_stub_scores_the_positive_fraction() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    assert_eq!(code(&gen_small(&data, "1")), 0);
    // The empty table never proves an equation, so every feature vector is
    // zero and every prediction is the same class.
    let model = AbductiveModel::new(
        PerceptionModel::new(0),
        one_feature(OpRuleSet::new()),
        Network::new(NetworkSpec::decision(1, 0)).unwrap(),
    )
    .unwrap();
    let bundle = tmp.path().join("model");
    save_model(&model, &TrainerConfig::default(), &bundle).unwrap();
    let csv = tmp.path().join("eval.csv");
    let out = abl(&["eval", "--model", path(&bundle), "--data", path(&data), "--out", path(&csv)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let rows = read_eval(&csv);
    assert_eq!(rows.len(), 3);
    for (_, n, acc) in &rows {
        assert!(*n > 0);
        assert_eq!(*acc, 0.5);
    }
    assert!(tmp.path().join("eval.csv.run.json").exists());
}

#[test]
fn eval_oracle_stub_scores_one() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = DatasetSpec::new(Semantics::BinaryAdd, GlyphFamilySpec::easy(11), vec![5, 6, 7], 20, 12);
    let (data, truth) = datasets::generate(&spec).unwrap();
    let dir = tmp.path().join("data");
    datasets::save(&data, &truth, &dir).unwrap();

    let labeled = truth.labeled_images(&data.instances);
    let mut perception = PerceptionModel::new(0);
    let cfg = TrainConfig {
        learning_rate: 0.05,
        epochs: 30,
        minibatch: 8,
        seed: 0,
        l2: 0.0,
    };
    perception.retrain(&labeled, &cfg).unwrap();
    assert_eq!(perception.accuracy(&labeled), 1.0);

    let model = AbductiveModel::new(perception, one_feature(OpRuleSet::addition()), identity_decision()).unwrap();
    let bundle = tmp.path().join("model");
    save_model(&model, &TrainerConfig::default(), &bundle).unwrap();
    let csv = tmp.path().join("eval.csv");
    let out = abl(&["eval", "--model", path(&bundle), "--data", path(&dir), "--out", path(&csv)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let rows = read_eval(&csv);
    assert_eq!(rows.last().unwrap().0, "all");
    assert_eq!(rows.last().unwrap().1, 60);
    assert!(rows.iter().all(|r| r.2 == 1.0));
}

#[test]
fn eval_rejects_a_tampered_bundle() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    assert_eq!(code(&gen_small(&data, "1")), 0);
    let model = AbductiveModel::new(
        PerceptionModel::new(0),
        one_feature(OpRuleSet::addition()),
        Network::new(NetworkSpec::decision(1, 0)).unwrap(),
    )
    .unwrap();
    let bundle = tmp.path().join("model");
    save_model(&model, &TrainerConfig::default(), &bundle).unwrap();
    let manifest = bundle.join("manifest.json");
    let text = fs::read_to_string(&manifest).unwrap().replace("\"feature_count\": 1", "\"feature_count\": 2");
    fs::write(&manifest, text).unwrap();
    let csv = tmp.path().join("eval.csv");
    let out = abl(&["eval", "--model", path(&bundle), "--data", path(&data), "--out", path(&csv)]);
    assert_eq!(code(&out), 1);
}

#[test]
fn train_then_report_is_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    let gen = abl(&[
        "gen-data",
        "--lengths",
        "5..6",
        "--per-length",
        "60",
        "--seed",
        "3",
        "--out",
        path(&data),
    ]);
    assert_eq!(code(&gen), 0);
    let train = |out: &Path| {
        abl(&[
            "train",
            "--data",
            path(&data),
            "--iters",
            "40",
            "--curriculum",
            "5,6",
            "--restarts",
            "5",
            "--probe-per-class",
            "10",
            "--seed",
            "4",
            "--out",
            path(out),
        ])
    };
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    let out = train(&a);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(code(&train(&b)), 0);
    for f in ["perception.ablnet", "decision.ablnet", "features.txt", "manifest.json", "attempts.csv"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    let strip_time = |p: &Path| -> Vec<String> {
        fs::read_to_string(p)
            .unwrap()
            .lines()
            .map(|l| l.rsplit_once(',').unwrap().0.to_string())
            .collect()
    };
    assert_eq!(strip_time(&a.join("log.csv")), strip_time(&b.join("log.csv")));

    let rep = tmp.path().join("rep");
    let out = abl(&[
        "report",
        "--log",
        path(&a.join("log.csv")),
        "--log",
        path(&b.join("log.csv")),
        "--out",
        path(&rep),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let log_rows = fs::read_to_string(a.join("log.csv")).unwrap().lines().count() - 1;
    let trials = fs::read_to_string(rep.join("trials.csv")).unwrap();
    assert_eq!(trials.lines().count() - 1, 2 * log_rows);
    let conv = fs::read_to_string(rep.join("convergence.csv")).unwrap();
    let rows: Vec<&str> = conv.lines().skip(1).collect();
    assert_eq!(rows.len(), 2);
    assert_eq!(
        rows[0].split_once(',').unwrap().1,
        rows[1].split_once(',').unwrap().1,
        "identical runs converge identically"
    );
}

#[test]
fn report_rejects_an_empty_log() {
    let tmp = tempfile::tempdir().unwrap();
    let log = tmp.path().join("log.csv");
    fs::write(
        &log,
        "iteration,stage,consistency,subsample_size,perception_accuracy,wall_time_ms\n",
    )
    .unwrap();
    let out = abl(&["report", "--log", path(&log), "--out", path(&tmp.path().join("r"))]);
    assert_eq!(code(&out), 1);
    let missing = abl(&["report", "--log", path(&tmp.path().join("none.csv")), "--out", path(tmp.path())]);
    assert_eq!(code(&missing), 1);
}
