//! End-to-end runs of the `gdakit` binary on a small synthetic corpus.

mod common;

use std::path::Path;
use std::process::{Command, Output};

use gdakit::pipeline::RunReport;

fn gdakit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gdakit"))
        .args(args)
        .env_remove("GDAKIT_OUT")
        .output()
        .expect("spawn gdakit")
}

fn write_config(dir: &Path, extra: &str) -> std::path::PathBuf {
    let p = dir.join("run.cfg");
    let text = format!(
        "paths.train = train.csv\npaths.test = test.csv\npaths.out = out\nreducer.gda.sigma = 50\nreducer.gda.budget = 300\nreducer.gda.min_per_class = 20\n{extra}"
    );
    std::fs::write(&p, text).unwrap();
    p
}

fn corpus(dir: &Path) {
    common::write_kdd_pair(dir, [80, 80, 50, 30, 60], [40, 40, 25, 15, 30]);
}

#[test]
fn run_writes_report_and_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    corpus(dir.path());
    let cfg = write_config(dir.path(), "reducer = gda\nclassifier = tree\nseed = 3\n");
    let o = gdakit(&["--config", cfg.to_str().unwrap(), "run"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = dir.path().join("out");
    for f in [
        "train.gdk",
        "test.gdk",
        "ingest.json",
        "GDADATA.train.gdk",
        "GDADATA.test.gdk",
        "reducer.gdk",
        "reduce.json",
        "classifier.gdk",
        "report.json",
        "report.csv",
    ] {
        assert!(out.join(f).is_file(), "missing {f}");
    }
    let r = RunReport::load(&out.join("report.json")).unwrap();
    assert_eq!(r.variant, "gda+tree");
    let mut expect: Vec<String> = common::CLASSES.map(String::from).to_vec();
    expect.sort_by_key(|c| ["Normal", "DOS", "R2L", "U2R", "Probe"].iter().position(|x| x == c));
    let mut got = r.class_names.clone();
    got.sort_by_key(|c| ["Normal", "DOS", "R2L", "U2R", "Probe"].iter().position(|x| x == c));
    assert_eq!(got, expect);
    let total: u64 = r.confusion.iter().flatten().sum();
    assert_eq!(total, 150);
    assert_eq!(r.test.rows, 150);
    assert!(r.components >= 1 && r.components <= 4);
    let csv = std::fs::read_to_string(out.join("report.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + r.class_names.len());
    assert!(csv.starts_with("class,variant,DR,FAR_tabular,FAR_textual,train_s,test_s"));
}

#[test]
fn staged_commands_and_comparison_report() {
    let dir = tempfile::tempdir().unwrap();
    corpus(dir.path());
    let mut reports = Vec::new();
    for (name, extra) in [
        ("lda", "reducer = lda\nclassifier = mlp\nclassifier.mlp.epochs = 20\n"),
        ("none", "reducer = none\nclassifier = tree\n"),
    ] {
        let cfg = write_config(dir.path(), extra);
        let c = cfg.to_str().unwrap();
        let out = dir.path().join(name);
        let o = out.to_str().unwrap();
        for step in ["ingest", "reduce", "train-eval"] {
            let res = gdakit(&["--config", c, "--out", o, step]);
            assert!(res.status.success(), "{step}: {}", String::from_utf8_lossy(&res.stderr));
        }
        reports.push(out.join("report.json"));
    }
    let cmp = dir.path().join("cmp");
    let mut args = vec!["--out", cmp.to_str().unwrap(), "report"];
    args.extend(reports.iter().map(|p| p.to_str().unwrap()));
    let o = gdakit(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["dr.svg", "far.svg", "train_time.svg", "test_time.svg"] {
        let s = std::fs::read_to_string(cmp.join(f)).unwrap();
        assert!(s.starts_with("<svg"));
        assert_eq!(s.matches(r#"class="series""#).count(), 2, "{f}");
    }
    let summary = std::fs::read_to_string(cmp.join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 1 + 2 * 5);
    assert!(summary.contains("lda+mlp") && summary.contains("none+tree"));
}

#[test]
fn train_eval_before_reduce_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    corpus(dir.path());
    let cfg = write_config(dir.path(), "");
    let o = gdakit(&["--config", cfg.to_str().unwrap(), "train-eval"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn missing_schema_exits_with_config_code() {
    let dir = tempfile::tempdir().unwrap();
    corpus(dir.path());
    let cfg = write_config(dir.path(), "paths.schema = nope.schema\n");
    let o = gdakit(&["--config", cfg.to_str().unwrap(), "ingest"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("nope.schema"));
    assert!(!dir.path().join("out").join("train.gdk").exists());
}

#[test]
fn unknown_config_key_exits_with_config_code() {
    let dir = tempfile::tempdir().unwrap();
    corpus(dir.path());
    let cfg = write_config(dir.path(), "reducer.gda.sigmaa = 2\n");
    let o = gdakit(&["--config", cfg.to_str().unwrap(), "run"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn empty_training_file_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    corpus(dir.path());
    std::fs::write(dir.path().join("train.csv"), "").unwrap();
    let cfg = write_config(dir.path(), "");
    let o = gdakit(&["--config", cfg.to_str().unwrap(), "run"]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn malformed_row_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    corpus(dir.path());
    let p = dir.path().join("test.csv");
    let mut text = std::fs::read_to_string(&p).unwrap();
    text.push_str("1,tcp,http\n");
    std::fs::write(&p, text).unwrap();
    let cfg = write_config(dir.path(), "");
    let o = gdakit(&["--config", cfg.to_str().unwrap(), "ingest"]);
    assert_eq!(o.status.code(), Some(3));
}
