//! End-to-end tests of the `cifar-ensemble` binary: artifact contents,
//! golden-output reproduction, and the documented exit codes.

mod common;

use std::path::Path;
use std::process::{Command, Output};

use ndarray::Array2;

use cifar_ensemble::dataset::{self, Dataset};
use cifar_ensemble::ensemble::EnsembleWeights;
use cifar_ensemble::experts::load_expert;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cifar-ensemble"))
        .args(args)
        .output()
        .expect("binary spawns")
}

fn assert_success(out: &Output) {
    assert!(
        out.status.success(),
        "command failed with {:?}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
}

/// Write a config for the mini dataset: cheap hyperparameters, deterministic
/// seed, KNN included as an ensemble expert.
fn write_mini_config(path: &Path, data: &Path, out: &Path) {
    let text = format!(
        "data_dir = {data:?}\noutput_dir = {out:?}\nseed = 11\n\n\
         [pca]\ncomponents = 20\n\n[knn]\nk = 5\n\n[logreg]\nepochs = 6\n\n\
         [ensemble]\ninclude_knn = true\n",
        data = data.display().to_string(),
        out = out.display().to_string(),
    );
    std::fs::write(path, text).unwrap();
}

/// Write a data directory holding only a test batch whose labels are the
/// committed fixture labels (pixels are all zero; only the labels matter
/// when no KNN expert is computed).
fn write_fixture_label_batch(data: &Path) -> usize {
    let labels: Vec<u8> = std::fs::read_to_string(common::fixture_dir().join("labels.txt"))
        .unwrap()
        .lines()
        .map(|l| l.parse().unwrap())
        .collect();
    let n = labels.len();
    let ds = Dataset::new(
        Array2::zeros((n, dataset::IMAGE_DIM)),
        labels,
        dataset::default_class_names(),
    )
    .unwrap();
    std::fs::create_dir_all(data).unwrap();
    dataset::write_cifar_batch(&ds, data.join(dataset::TEST_BATCH_FILE)).unwrap();
    n
}

#[test]
fn table1_writes_summary_and_one_report_per_sweep_row() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    common::write_mini_dataset(&data, 60, 100, 7);
    let out = dir.path().join("out");
    let cfg = dir.path().join("config.toml");
    write_mini_config(&cfg, &data, &out);

    let result = run(&["--config", cfg.to_str().unwrap(), "table1"]);
    assert_success(&result);

    let summary = std::fs::read_to_string(out.join("summary.txt")).unwrap();
    assert_eq!(summary.lines().filter(|l| l.starts_with("logreg ")).count(), 7);
    assert_eq!(summary.lines().filter(|l| l.starts_with("knn ")).count(), 9);
    assert!(summary.contains("<- best logreg"));
    assert!(summary.contains("<- best knn"));
    assert!(summary.contains("config-digest: sha256:"));

    // One standalone report per sweep row, named by its component count.
    for label in ["raw", "50", "100", "150", "200", "225", "250"] {
        assert!(out.join(format!("logreg_{label}.txt")).exists(), "logreg_{label}.txt");
    }
    for label in ["raw", "200", "75", "50", "40", "30", "25", "15", "10"] {
        assert!(out.join(format!("knn_{label}.txt")).exists(), "knn_{label}.txt");
    }
}

#[test]
fn export_knn_round_trips_through_the_expert_loader() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    common::write_mini_dataset(&data, 40, 80, 3);
    let out = dir.path().join("out");
    let cfg = dir.path().join("config.toml");
    write_mini_config(&cfg, &data, &out);

    let result = run(&["--config", cfg.to_str().unwrap(), "export-knn"]);
    assert_success(&result);
    let stdout = String::from_utf8_lossy(&result.stdout);
    assert!(stdout.contains("knn accuracy:"), "stdout: {stdout}");

    let expert = load_expert(out.join("knn.expert"), Some(80)).unwrap();
    assert_eq!(expert.name, "knn");
    assert_eq!(expert.len(), 80);
    assert!(out.join("knn_report.txt").exists());
}

#[test]
fn ensemble_with_a_single_expert_keeps_unit_weight() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    write_fixture_label_batch(&data);
    let out = dir.path().join("out");
    let cnn1 = common::fixture_dir().join("cnn1.expert");
    let cfg = dir.path().join("config.toml");
    std::fs::write(
        &cfg,
        format!(
            "data_dir = {:?}\noutput_dir = {:?}\n\n[ensemble]\nexperts = [{:?}]\n",
            data.display().to_string(),
            out.display().to_string(),
            cnn1.display().to_string(),
        ),
    )
    .unwrap();

    let result = run(&["--config", cfg.to_str().unwrap(), "ensemble"]);
    assert_success(&result);

    let weights = EnsembleWeights::load(out.join("ensemble_weights.txt")).unwrap();
    assert_eq!(weights.expert_names, vec!["cnn1".to_string()]);
    assert_eq!(weights.weights, vec![1.0]);
    assert!(weights.search_split.starts_with("holdout"), "{}", weights.search_split);
    assert!(out.join("search_split.txt").exists());
    assert!(out.join("ensemble_report.txt").exists());
}

#[test]
fn ensemble_search_on_test_reproduces_the_committed_weights() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    write_fixture_label_batch(&data);
    let out = dir.path().join("out");
    let fixtures = common::fixture_dir();
    let experts: Vec<String> = ["cnn1", "cnn2", "cnn3", "cnn4", "knn"]
        .iter()
        .map(|n| format!("{:?}", fixtures.join(format!("{n}.expert")).display().to_string()))
        .collect();
    let cfg = dir.path().join("config.toml");
    std::fs::write(
        &cfg,
        format!(
            "data_dir = {:?}\noutput_dir = {:?}\n\n[ensemble]\nexperts = [{}]\n",
            data.display().to_string(),
            out.display().to_string(),
            experts.join(", "),
        ),
    )
    .unwrap();

    let result = run(&["--config", cfg.to_str().unwrap(), "ensemble", "--search-on-test"]);
    assert_success(&result);
    let stderr = String::from_utf8_lossy(&result.stderr);
    assert!(stderr.contains("optimistically biased"), "stderr: {stderr}");

    let produced = std::fs::read(out.join("ensemble_weights.txt")).unwrap();
    let golden = std::fs::read(fixtures.join("golden_weights.txt")).unwrap();
    assert_eq!(produced, golden, "weight search drifted from the committed golden output");
}

#[test]
fn missing_data_directory_exits_with_the_data_code() {
    let dir = tempfile::tempdir().unwrap();
    let result = run(&[
        "--data-dir",
        dir.path().join("nope").to_str().unwrap(),
        "--out",
        dir.path().join("out").to_str().unwrap(),
        "table1",
    ]);
    assert_eq!(result.status.code(), Some(3), "{}", String::from_utf8_lossy(&result.stderr));
    assert!(String::from_utf8_lossy(&result.stderr).starts_with("error:"));
}

#[test]
fn invalid_configuration_exits_with_the_config_code() {
    let dir = tempfile::tempdir().unwrap();

    // Unknown key in the config file.
    let cfg = dir.path().join("config.toml");
    std::fs::write(&cfg, "not_a_real_field = 1\n").unwrap();
    let result = run(&["--config", cfg.to_str().unwrap(), "table1"]);
    assert_eq!(result.status.code(), Some(2), "{}", String::from_utf8_lossy(&result.stderr));

    // Ensemble with nothing to fuse.
    let data = dir.path().join("data");
    write_fixture_label_batch(&data);
    let result = run(&[
        "--data-dir",
        data.to_str().unwrap(),
        "--out",
        dir.path().join("out").to_str().unwrap(),
        "ensemble",
    ]);
    assert_eq!(result.status.code(), Some(2), "{}", String::from_utf8_lossy(&result.stderr));
}

#[test]
fn divergent_training_exits_with_the_numeric_code() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    common::write_mini_dataset(&data, 60, 40, 5);
    let out = dir.path().join("out");
    let cfg = dir.path().join("config.toml");
    std::fs::write(
        &cfg,
        format!(
            "data_dir = {:?}\noutput_dir = {:?}\n\n\
             [logreg]\nlearning_rate = 1e6\nepochs = 5\n",
            data.display().to_string(),
            out.display().to_string(),
        ),
    )
    .unwrap();

    let result = run(&["--config", cfg.to_str().unwrap(), "table1"]);
    assert_eq!(result.status.code(), Some(4), "{}", String::from_utf8_lossy(&result.stderr));
    assert!(String::from_utf8_lossy(&result.stderr).contains("diverged"));
}
