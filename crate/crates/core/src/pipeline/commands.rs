//! File-backed pipeline steps. Everything lives under the output directory:
//!
//! ```text
//! train.gdk, test.gdk, ingest.json          ingest
//! <NAME>.train.gdk, <NAME>.test.gdk         reduce (NAME = ORIGDATA | LDADATA | GDADATA)
//! reducer.gdk, reduce.json                  reduce (no model file for `none`)
//! classifier.gdk, report.json, report.csv   train-eval
//! ```

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;

use super::report::{summary_csv, write_comparison};
use super::{
    ingest, reduce, train_eval, ClassifierModel, IngestSummary, PipelineConfig, ReduceSummary, Reduced,
    ReducerModel, RunReport,
};
use crate::container::{write_atomic, Persist};
use crate::dataset::NumericDataset;
use crate::error::{Error, Result};
use crate::gda::GdaModel;
use crate::lda::LdaModel;

pub const TRAIN_FILE: &str = "train.gdk";
pub const TEST_FILE: &str = "test.gdk";
pub const INGEST_SUMMARY: &str = "ingest.json";
pub const REDUCE_SUMMARY: &str = "reduce.json";
pub const REDUCER_FILE: &str = "reducer.gdk";
pub const CLASSIFIER_FILE: &str = "classifier.gdk";
pub const REPORT_JSON: &str = "report.json";
pub const REPORT_CSV: &str = "report.csv";

fn write_json<T: Serialize>(path: &Path, v: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    write_atomic(path, s.as_bytes())
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::from(e).in_file(path))?;
    serde_json::from_str(&text).map_err(|e| Error::from(e).in_file(path))
}

fn require(path: &Path, step: &str) -> Result<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "`{}` not found; run `{step}` first",
            path.display()
        )))
    }
}

pub fn reduced_paths(out: &Path, dataset: &str) -> (PathBuf, PathBuf) {
    (
        out.join(format!("{dataset}.train.gdk")),
        out.join(format!("{dataset}.test.gdk")),
    )
}

pub fn cmd_ingest(cfg: &PipelineConfig) -> Result<IngestSummary> {
    let ing = ingest(cfg)?;
    ing.train.save(&cfg.out.join(TRAIN_FILE))?;
    ing.test.save(&cfg.out.join(TEST_FILE))?;
    write_json(&cfg.out.join(INGEST_SUMMARY), &ing.summary)?;
    Ok(ing.summary)
}

pub fn cmd_reduce(cfg: &PipelineConfig) -> Result<ReduceSummary> {
    let (train_p, test_p) = (cfg.out.join(TRAIN_FILE), cfg.out.join(TEST_FILE));
    require(&train_p, "ingest")?;
    require(&test_p, "ingest")?;
    let train = NumericDataset::load(&train_p)?;
    let test = NumericDataset::load(&test_p)?;
    let reduced = reduce(&train, &test, cfg)?;
    let (a, b) = reduced_paths(&cfg.out, &reduced.summary.dataset);
    reduced.train.save(&a)?;
    reduced.test.save(&b)?;
    let model_path = cfg.out.join(REDUCER_FILE);
    match &reduced.model {
        ReducerModel::None => {
            if model_path.exists() {
                std::fs::remove_file(&model_path).map_err(|e| Error::from(e).in_file(&model_path))?;
            }
        }
        ReducerModel::Lda(m) => m.save(&model_path)?,
        ReducerModel::Gda(m) => m.save(&model_path)?,
    }
    write_json(&cfg.out.join(REDUCE_SUMMARY), &reduced.summary)?;
    Ok(reduced.summary)
}

/// Loads the reduced datasets and the reducer model written by `reduce`.
pub fn load_reduced(out: &Path) -> Result<Reduced> {
    let summary_path = out.join(REDUCE_SUMMARY);
    require(&summary_path, "reduce")?;
    let summary: ReduceSummary = read_json(&summary_path)?;
    let (a, b) = reduced_paths(out, &summary.dataset);
    let model_path = out.join(REDUCER_FILE);
    let model = match summary.method.as_str() {
        "none" => ReducerModel::None,
        "lda" => ReducerModel::Lda(LdaModel::load(&model_path)?),
        "gda" => ReducerModel::Gda(GdaModel::load(&model_path)?),
        m => return Err(Error::Format(format!("unknown reducer `{m}`")).in_file(summary_path)),
    };
    Ok(Reduced {
        train: NumericDataset::load(&a)?,
        test: NumericDataset::load(&b)?,
        model,
        summary,
    })
}

pub fn cmd_train_eval(cfg: &PipelineConfig) -> Result<RunReport> {
    let reduced = load_reduced(&cfg.out)?;
    if reduced.summary.method != cfg.reducer.as_str() {
        return Err(Error::Config(format!(
            "reduced data was produced by `{}` but the config selects `{}`; rerun `reduce`",
            reduced.summary.method,
            cfg.reducer.as_str()
        )));
    }
    let (mut report, model) = train_eval(&reduced, cfg)?;
    let model_path = cfg.out.join(CLASSIFIER_FILE);
    match &model {
        ClassifierModel::Tree(m) => m.save(&model_path)?,
        ClassifierModel::Mlp(m) => m.save(&model_path)?,
    }
    let (a, b) = reduced_paths(Path::new(""), &reduced.summary.dataset);
    let mut put = |k: &str, v: &Path| {
        report.artifacts.insert(k.into(), v.display().to_string());
    };
    put("train", &a);
    put("test", &b);
    if !matches!(reduced.model, ReducerModel::None) {
        put("reducer", Path::new(REDUCER_FILE));
    }
    put("classifier", Path::new(CLASSIFIER_FILE));
    // Reports are written last, each via write-then-rename.
    for f in &cfg.formats {
        match f.as_str() {
            "json" => report.save_json(&cfg.out.join(REPORT_JSON))?,
            "csv" => write_atomic(
                &cfg.out.join(REPORT_CSV),
                &summary_csv(std::slice::from_ref(&report))?,
            )?,
            _ => unreachable!("formats are validated with the config"),
        }
    }
    Ok(report)
}

pub fn cmd_run(cfg: &PipelineConfig) -> Result<RunReport> {
    cmd_ingest(cfg)?;
    cmd_reduce(cfg)?;
    cmd_train_eval(cfg)
}

pub fn cmd_report(reports: &[PathBuf], out: &Path) -> Result<Vec<PathBuf>> {
    let loaded = reports.iter().map(|p| RunReport::load(p)).collect::<Result<Vec<_>>>()?;
    write_comparison(&loaded, out)
}
