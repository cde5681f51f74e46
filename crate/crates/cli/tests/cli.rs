use std::path::Path;
use std::process::{Command, Output};

use auditml_cli::{load_model, ModelFile};

fn auditml(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_auditml")).args(args).current_dir(dir).output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn small_setup() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("demo.cfg"), "gen.n_records = 250\nrf.n_estimators = 20\n").unwrap();
    dir
}

#[test]
fn compare_writes_table_and_report() {
    let dir = small_setup();
    let o = auditml(dir.path(), &["compare", "--config", "demo.cfg", "--seed", "42", "--out", "o"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("o/comparison.csv")).unwrap();
    assert!(csv.starts_with("model,mean_f1"));
    assert_eq!(csv.lines().count(), 4);
    let txt = std::fs::read_to_string(dir.path().join("o/comparison.txt")).unwrap();
    assert!(txt.starts_with("# binary metrics"));
    assert!(txt.contains("\nModel Mean_F1 Mean_Accuracy Mean_Recall\n"));
    assert!(dir.path().join("o/manifest-compare.json").is_file());
}

#[test]
fn unknown_flag_is_usage_error() {
    let dir = small_setup();
    let o = auditml(dir.path(), &["compare", "--frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("error[usage]:"), "{}", stderr(&o));
}

#[test]
fn misspelled_config_key_exits_2() {
    let dir = small_setup();
    std::fs::write(dir.path().join("bad.cfg"), "svm.gama = 0.5\n").unwrap();
    let o = auditml(dir.path(), &["cv", "--model", "svm", "--config", "bad.cfg"]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.starts_with("error[config]:") && err.contains("svm.gama"), "{err}");
}

#[test]
fn single_class_svm_training_exits_4() {
    let dir = small_setup();
    // No record reaches a 99% risk percentage, so every label is 0.
    std::fs::write(dir.path().join("one.cfg"), "gen.n_records = 200\nlabel.tau = 0.99\n").unwrap();
    let o = auditml(dir.path(), &["train", "--model", "svm", "--config", "one.cfg", "--out", "o"]);
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
    assert!(stderr(&o).starts_with("error[training]:"), "{}", stderr(&o));
}

#[test]
fn missing_input_is_config_error() {
    let dir = small_setup();
    let o = auditml(dir.path(), &["corr", "--input", "nope.csv"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn malformed_csv_is_data_error() {
    let dir = small_setup();
    std::fs::write(dir.path().join("bad.csv"), "not,a,record\n1,2,3\n").unwrap();
    let o = auditml(dir.path(), &["figures", "--input", "bad.csv", "--out", "o"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).starts_with("error[data]:"), "{}", stderr(&o));
}

#[test]
fn train_predict_and_damaged_model_files() {
    let dir = small_setup();
    let p = dir.path();
    assert_eq!(auditml(p, &["gen", "--config", "demo.cfg", "--out", "."]).status.code(), Some(0));
    let o = auditml(p, &["train", "--model", "rf", "--config", "demo.cfg", "--input", "data.csv", "--out", "."]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let model: ModelFile = load_model(&p.join("model-rf.aml")).unwrap();
    assert_eq!(model.model.spec.kind.tag(), "rf");

    let o = auditml(p, &["predict", "--model", "model-rf.aml", "--input", "data.csv", "--out", "."]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let preds = std::fs::read_to_string(p.join("predictions.csv")).unwrap();
    assert_eq!(preds.lines().count(), 251);

    let text = std::fs::read_to_string(p.join("model-rf.aml")).unwrap();
    std::fs::write(p.join("cut.aml"), &text[..text.len() - 40]).unwrap();
    let o = auditml(p, &["predict", "--model", "cut.aml", "--input", "data.csv", "--out", "."]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).starts_with("error[corrupt]:"), "{}", stderr(&o));

    std::fs::write(p.join("future.aml"), text.replace("format_version=1", "format_version=9")).unwrap();
    let o = auditml(p, &["predict", "--model", "future.aml", "--input", "data.csv", "--out", "."]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.starts_with("error[version]:") && err.contains('9') && err.contains('1'), "{err}");
}

#[test]
fn grid_requires_svm() {
    let dir = small_setup();
    let o = auditml(dir.path(), &["cv", "--model", "rf", "--grid", "--config", "demo.cfg", "--out", "o"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn gen_rejects_csv_source() {
    let dir = small_setup();
    std::fs::write(dir.path().join("x.csv"), "").unwrap();
    std::fs::write(dir.path().join("csv.cfg"), "data.path = x.csv\n").unwrap();
    let o = auditml(dir.path(), &["gen", "--config", "csv.cfg", "--out", "o"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn run_returns_exit_codes_in_process() {
    assert_eq!(auditml_cli::run(["auditml", "--help"]), 0);
    assert_eq!(auditml_cli::run(["auditml"]), 2);
}
