//! ingest → reduce → classify → evaluate, in memory.
//!
//! [`commands`] wraps these stages with file artifacts for the CLI.

pub mod commands;
mod config;
pub mod report;

pub use config::{
    parse_pairs, ClassifierKind, GdaSettings, LdaSettings, PipelineConfig, ReducerKind,
};
pub use report::{DatasetSummary, RunReport, RunTimings};

use serde::{Deserialize, Serialize};

use crate::classifiers::{predict_mlp, predict_tree, train_mlp, train_tree, MlpModel, TreeModel};
use crate::dataset::{
    map_labels, read_kdd_file, stratified_sample, Category, Encoder, LabelMap, NumericDataset,
    ParseOptions, RawDataset, Schema,
};
use crate::error::{Error, Result};
use crate::gda::{fit_gda, project_gda, rank_features_gda, GdaModel, GdaParams};
use crate::lda::{fit_lda, project_lda, rank_features_lda, FeatureScore, LdaModel};
use crate::metrics::{accuracy, class_reports, confusion_matrix, timed};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestSummary {
    pub train_source_rows: usize,
    pub test_source_rows: usize,
    /// Category histograms over all five categories, before any subsampling.
    pub categories: Vec<String>,
    pub train_histogram: Vec<usize>,
    pub test_histogram: Vec<usize>,
    /// Classes kept (those present in training) and their final sizes.
    pub class_names: Vec<String>,
    pub train_class_sizes: Vec<usize>,
    pub test_class_sizes: Vec<usize>,
    pub features: usize,
    pub encoded_width: usize,
    pub zero_variance: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct Ingested {
    pub train: NumericDataset,
    pub test: NumericDataset,
    pub summary: IngestSummary,
}

fn load_schema(cfg: &PipelineConfig) -> Result<Schema> {
    cfg.schema.as_deref().map_or_else(|| Ok(Schema::kdd()), Schema::from_file)
}

fn load_labels(cfg: &PipelineConfig) -> Result<LabelMap> {
    let map = cfg.labels.as_deref().map_or_else(|| Ok(LabelMap::kdd()), LabelMap::from_file)?;
    Ok(map.with_policy(cfg.unknown_label))
}

/// Parses, labels and encodes the configured train/test files. The encoder
/// is fit on the training file only.
pub fn ingest(cfg: &PipelineConfig) -> Result<Ingested> {
    cfg.validate_paths(true)?;
    let schema = load_schema(cfg)?;
    let labels = load_labels(cfg)?;
    let opts = ParseOptions { header: cfg.header };
    let train_path = cfg.train.as_deref().expect("validated");
    let test_path = cfg.test.as_deref().expect("validated");
    let raw_train = read_kdd_file(train_path, &schema, opts)?;
    let raw_test = read_kdd_file(test_path, &schema, opts)?;
    ingest_raw(cfg, &raw_train, &raw_test, &labels)
        .map_err(|e| match e {
            Error::UnknownLabel(_) => e.in_file(train_path),
            e => e,
        })
}

pub fn ingest_raw(
    cfg: &PipelineConfig,
    raw_train: &RawDataset,
    raw_test: &RawDataset,
    labels: &LabelMap,
) -> Result<Ingested> {
    let la_train = map_labels(raw_train, labels)?;
    let la_test = map_labels(raw_test, labels)?;
    let kept: Vec<usize> = (0..5).filter(|&c| la_train.histogram[c] > 0).collect();
    let class_names: Vec<String> = kept.iter().map(|&c| Category::ALL[c].name().to_string()).collect();
    let remap = |ids: &[usize]| -> Result<Vec<usize>> {
        ids.iter()
            .map(|&id| {
                kept.iter()
                    .position(|&k| k == id)
                    .ok_or_else(|| Error::EmptyClass(Category::ALL[id].name().to_string()))
            })
            .collect()
    };
    let encoder = Encoder::fit(raw_train)?;
    let mut train = encoder.encode_with(raw_train, remap(&la_train.ids)?, class_names.clone())?;
    let mut test = encoder.encode_with(raw_test, remap(&la_test.ids)?, class_names.clone())?;
    if let Some(b) = cfg.train_budget {
        train = stratified_sample(&train, b, cfg.min_per_class, cfg.seed)?;
    }
    if let Some(b) = cfg.test_budget {
        test = stratified_sample(&test, b, cfg.min_per_class, cfg.seed.wrapping_add(1))?;
    }
    let zero_variance = encoder
        .zero_variance()
        .into_iter()
        .map(|i| raw_train.schema.columns()[i].name.clone())
        .collect();
    let summary = IngestSummary {
        train_source_rows: raw_train.rows(),
        test_source_rows: raw_test.rows(),
        categories: Category::names(),
        train_histogram: la_train.histogram.to_vec(),
        test_histogram: la_test.histogram.to_vec(),
        class_names,
        train_class_sizes: train.class_sizes(),
        test_class_sizes: test.class_sizes(),
        features: raw_train.schema.len(),
        encoded_width: encoder.width(),
        zero_variance,
    };
    Ok(Ingested { train, test, summary })
}

#[derive(Debug, Clone, PartialEq)]
pub enum ReducerModel {
    None,
    Lda(LdaModel),
    Gda(GdaModel),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReduceSummary {
    pub method: String,
    pub dataset: String,
    /// Original features entering the reducer.
    pub input_features: usize,
    pub input_width: usize,
    pub output_width: usize,
    pub components: usize,
    pub eigenvalues: Vec<f64>,
    /// Rows used to fit a kernel model.
    pub basis_rows: Option<usize>,
    pub kernel_rank: Option<usize>,
    pub ranked_features: Vec<FeatureScore>,
    pub fit_seconds: f64,
}

#[derive(Debug, Clone)]
pub struct Reduced {
    pub train: NumericDataset,
    pub test: NumericDataset,
    pub model: ReducerModel,
    pub summary: ReduceSummary,
}

fn projected(ds: &NumericDataset, z: nalgebra::DMatrix<f64>, prefix: &str) -> Result<NumericDataset> {
    let names = (1..=z.ncols()).map(|i| format!("{prefix}{i}")).collect();
    NumericDataset::from_continuous(z, ds.labels.clone(), ds.class_names.clone(), names)
}

/// Applies the configured reducer. A kernel reducer is fit on a stratified
/// subsample of `train` and then projects the full train and test sets.
pub fn reduce(train: &NumericDataset, test: &NumericDataset, cfg: &PipelineConfig) -> Result<Reduced> {
    let (train, test) = if cfg.features.is_empty() {
        (train.clone(), test.clone())
    } else {
        (train.select_features(&cfg.features)?, test.select_features(&cfg.features)?)
    };
    let input_features = train.groups.len();
    let input_width = train.dim();
    let mut summary = ReduceSummary {
        method: cfg.reducer.as_str().into(),
        dataset: cfg.reducer.dataset_name().into(),
        input_features,
        input_width,
        output_width: input_width,
        components: input_width,
        eigenvalues: Vec::new(),
        basis_rows: None,
        kernel_rank: None,
        ranked_features: Vec::new(),
        fit_seconds: 0.0,
    };
    let (rtrain, rtest, model) = match cfg.reducer {
        ReducerKind::None => (train, test, ReducerModel::None),
        ReducerKind::Lda => {
            let (model, t) = timed("reduce_fit", || fit_lda(&train, cfg.lda.components, cfg.lda.ridge));
            let model = model?;
            summary.fit_seconds = t.seconds;
            summary.eigenvalues = model.eigenvalues.clone();
            if cfg.rank_features > 0 {
                summary.ranked_features = rank_features_lda(&model);
                summary.ranked_features.truncate(cfg.rank_features);
            }
            let a = projected(&train, project_lda(&model, &train.x)?, "lda")?;
            let b = projected(&test, project_lda(&model, &test.x)?, "lda")?;
            (a, b, ReducerModel::Lda(model))
        }
        ReducerKind::Gda => {
            let params = GdaParams {
                kernel: cfg.gda.kernel,
                components: cfg.gda.components,
                ridge: cfg.gda.ridge,
                rank_tol: cfg.gda.rank_tol,
            };
            let (fit, t) = timed("reduce_fit", || -> Result<(GdaModel, NumericDataset)> {
                let basis = stratified_sample(&train, cfg.gda.budget, cfg.gda.min_per_class, cfg.seed)?;
                Ok((fit_gda(&basis, &params)?, basis))
            });
            let (model, basis) = fit?;
            summary.fit_seconds = t.seconds;
            summary.eigenvalues = model.eigenvalues.clone();
            summary.basis_rows = Some(model.basis.nrows());
            summary.kernel_rank = Some(model.kernel_rank);
            if cfg.rank_features > 0 {
                summary.ranked_features = rank_features_gda(&model, &basis)?;
                summary.ranked_features.truncate(cfg.rank_features);
            }
            let a = projected(&train, project_gda(&model, &train.x)?, "gda")?;
            let b = projected(&test, project_gda(&model, &test.x)?, "gda")?;
            (a, b, ReducerModel::Gda(model))
        }
    };
    summary.output_width = rtrain.dim();
    summary.components = rtrain.dim();
    Ok(Reduced {
        train: rtrain,
        test: rtest,
        model,
        summary,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum ClassifierModel {
    Tree(TreeModel),
    Mlp(MlpModel),
}

impl ClassifierModel {
    pub fn predict(&self, x: &nalgebra::DMatrix<f64>) -> Result<Vec<usize>> {
        Ok(match self {
            ClassifierModel::Tree(m) => predict_tree(m, x)?.0,
            ClassifierModel::Mlp(m) => predict_mlp(m, x)?.0,
        })
    }
}

pub fn train_classifier(train: &NumericDataset, cfg: &PipelineConfig) -> Result<ClassifierModel> {
    Ok(match cfg.classifier {
        ClassifierKind::Tree => ClassifierModel::Tree(train_tree(train, &cfg.tree)?),
        ClassifierKind::Mlp => ClassifierModel::Mlp(train_mlp(train, &cfg.mlp)?),
    })
}

/// Trains the configured classifier on the reduced training set and
/// evaluates it on the reduced test set.
pub fn train_eval(reduced: &Reduced, cfg: &PipelineConfig) -> Result<(RunReport, ClassifierModel)> {
    let (model, train_t) = timed("classifier_train", || train_classifier(&reduced.train, cfg));
    let model = model?;
    let (pred, test_t) = timed("classifier_test", || model.predict(&reduced.test.x));
    let pred = pred?;
    let cm = confusion_matrix(&reduced.test.labels, &pred, &reduced.test.class_names)?;
    let report = RunReport {
        format: report::FORMAT.into(),
        version: report::VERSION,
        variant: cfg.variant_name(),
        dataset: reduced.summary.dataset.clone(),
        reducer: reduced.summary.method.clone(),
        classifier: cfg.classifier.as_str().into(),
        config: cfg.echo(),
        components: reduced.summary.components,
        eigenvalues: reduced.summary.eigenvalues.clone(),
        basis_rows: reduced.summary.basis_rows,
        train: DatasetSummary::of(&reduced.train),
        test: DatasetSummary::of(&reduced.test),
        class_names: cm.class_names().to_vec(),
        confusion: cm.rows(),
        accuracy: accuracy(&cm),
        classes: class_reports(&cm),
        timings: RunTimings {
            reduce_fit_s: reduced.summary.fit_seconds,
            classifier_train_s: train_t.seconds,
            classifier_test_s: test_t.seconds,
        },
        artifacts: Default::default(),
    };
    Ok((report, model))
}
