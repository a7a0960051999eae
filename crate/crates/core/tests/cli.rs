use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn aloof(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aloof")).args(args).output().unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// Writes a small mixed-type binary dataset with its schema.
fn fixture(dir: &TempDir) -> (PathBuf, PathBuf) {
    let data = dir.path().join("train.csv");
    let schema = dir.path().join("train.schema");
    let mut text = String::from("x,colour,y\n");
    for i in 0..120 {
        let x = (i * 37 % 120) as f64 / 120.0;
        let colour = ["red", "green", "blue", "grey"][i % 4];
        let y = if (x > 0.5) ^ (colour == "blue") { "yes" } else { "no" };
        text.push_str(&format!("{x},{colour},{y}\n"));
    }
    fs::write(&data, text).unwrap();
    fs::write(&schema, "x:numeric\ncolour:categorical\ny:response-binary\n").unwrap();
    (data, schema)
}

#[test]
fn train_then_predict_round_trip() {
    let dir = TempDir::new().unwrap();
    let (data, schema) = fixture(&dir);
    let model = dir.path().join("model.json");
    let preds = dir.path().join("preds.csv");
    let out = aloof(&["train", "--data", p(&data), "--schema", p(&schema), "--out", p(&model)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let out = aloof(&["predict", "--model", p(&model), "--data", p(&data), "--schema", p(&schema), "--out", p(&preds)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(&preds).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("prediction"));
    let values: Vec<f64> = lines.map(|l| l.parse().unwrap()).collect();
    assert_eq!(values.len(), 120);
    assert!(values.iter().all(|v| (0.0..=1.0).contains(v)));
}

#[test]
fn identical_flags_give_identical_output() {
    let dir = TempDir::new().unwrap();
    let (data, schema) = fixture(&dir);
    for learner in ["tree", "rf", "gb"] {
        let run = || {
            aloof(&[
                "cv", "--data", p(&data), "--schema", p(&schema), "--learner", learner, "--rf-trees", "20",
                "--gb-trees", "10", "--k", "5", "--seed", "9",
            ])
        };
        let (a, b) = (run(), run());
        assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
        assert_eq!(a.stdout, b.stdout, "{learner}");
    }
}

#[test]
fn thread_count_does_not_change_results() {
    let run = |threads: &str| {
        aloof(&[
            "--threads", threads, "simulate", "alpha-sweep", "--alphas", "0,5", "--n", "80", "--k-categories", "10",
            "--test-n", "100", "--reps", "3", "--seed", "2",
        ])
    };
    let (a, b) = (run("1"), run("3"));
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn inputs_are_left_untouched() {
    let dir = TempDir::new().unwrap();
    let (data, schema) = fixture(&dir);
    let before = (fs::read(&data).unwrap(), fs::read(&schema).unwrap());
    let out = aloof(&["cv", "--data", p(&data), "--schema", p(&schema), "--k", "4", "--out", p(&data)]);
    assert_eq!(out.status.code(), Some(1));
    let out = aloof(&["train", "--data", p(&data), "--schema", p(&schema)]);
    assert!(out.status.success());
    assert_eq!((fs::read(&data).unwrap(), fs::read(&schema).unwrap()), before);
}

#[test]
fn cv_report_has_fold_rows_and_mean() {
    let dir = TempDir::new().unwrap();
    let (data, schema) = fixture(&dir);
    let out = aloof(&["cv", "--data", p(&data), "--schema", p(&schema), "--k", "4"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "fold,n_train,n_test,valid,mse,misclassification,auc");
    assert_eq!(lines.len(), 6);
    assert!(lines[5].starts_with("mean"));
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let (data, schema) = fixture(&dir);
    assert_eq!(aloof(&["sign-test", "--wins", "9", "--trials", "10"]).status.code(), Some(0));
    assert_eq!(aloof(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(aloof(&["bench", "--cases", "bogus"]).status.code(), Some(2));
    assert_eq!(aloof(&["train", "--data", p(&data)]).status.code(), Some(2));
    let missing = dir.path().join("missing.csv");
    assert_eq!(aloof(&["train", "--data", p(&missing), "--schema", p(&schema)]).status.code(), Some(1));
    let out = aloof(&["importance", "--data", p(&data), "--schema", p(&schema)]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn sign_test_prints_both_tails() {
    let out = aloof(&["sign-test", "--wins", "10", "--trials", "10"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("wins,trials,exact,normal"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[..2], ["10", "10"]);
    assert!((row[2].parse::<f64>().unwrap() - 1.0 / 1024.0).abs() < 1e-12);
}

#[test]
fn importance_ranks_signal_feature() {
    let dir = TempDir::new().unwrap();
    let (data, schema) = fixture(&dir);
    let out = aloof(&[
        "importance", "--data", p(&data), "--schema", p(&schema), "--learner", "rf", "--rf-trees", "50",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("feature,score,stderr\n"));
    assert_eq!(text.lines().count(), 3);
}
