//! Flat `key = value` configuration with dotted section prefixes.
//!
//! ```text
//! # comment
//! paths.train = data/train.csv
//! reducer = gda
//! reducer.gda.sigma = 0.1
//! classifier = tree
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::classifiers::{MlpConfig, TreeConfig};
use crate::dataset::{Category, UnknownPolicy};
use crate::eigencore::{KernelSpec, RANK_TOL};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReducerKind {
    None,
    Lda,
    Gda,
}

impl ReducerKind {
    /// Name of the reduced dataset family.
    pub fn dataset_name(self) -> &'static str {
        match self {
            ReducerKind::None => "ORIGDATA",
            ReducerKind::Lda => "LDADATA",
            ReducerKind::Gda => "GDADATA",
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ReducerKind::None => "none",
            ReducerKind::Lda => "lda",
            ReducerKind::Gda => "gda",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClassifierKind {
    Tree,
    Mlp,
}

impl ClassifierKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ClassifierKind::Tree => "tree",
            ClassifierKind::Mlp => "mlp",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LdaSettings {
    pub components: usize,
    pub ridge: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GdaSettings {
    pub kernel: KernelSpec,
    pub components: usize,
    pub ridge: Option<f64>,
    pub rank_tol: f64,
    pub budget: usize,
    pub min_per_class: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub train: Option<PathBuf>,
    pub test: Option<PathBuf>,
    pub schema: Option<PathBuf>,
    pub labels: Option<PathBuf>,
    pub out: PathBuf,
    pub header: bool,
    pub unknown_label: UnknownPolicy,
    /// Stratified caps applied right after encoding.
    pub train_budget: Option<usize>,
    pub test_budget: Option<usize>,
    pub min_per_class: usize,
    /// Original feature names kept before reduction (all when empty).
    pub features: Vec<String>,
    pub reducer: ReducerKind,
    pub lda: LdaSettings,
    pub gda: GdaSettings,
    /// Record the top-k ranked original features in the reduce summary.
    pub rank_features: usize,
    pub classifier: ClassifierKind,
    pub tree: TreeConfig,
    pub mlp: MlpConfig,
    pub seed: u64,
    pub variant: Option<String>,
    pub formats: Vec<String>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            train: None,
            test: None,
            schema: None,
            labels: None,
            out: PathBuf::from("gdakit-out"),
            header: false,
            unknown_label: UnknownPolicy::Error,
            train_budget: None,
            test_budget: None,
            min_per_class: 50,
            features: Vec::new(),
            reducer: ReducerKind::Gda,
            lda: LdaSettings {
                components: 4,
                ridge: None,
            },
            gda: GdaSettings {
                kernel: KernelSpec::default(),
                components: 4,
                ridge: None,
                rank_tol: RANK_TOL,
                budget: 2000,
                min_per_class: 50,
            },
            rank_features: 0,
            classifier: ClassifierKind::Tree,
            tree: TreeConfig::default(),
            mlp: MlpConfig::new(0),
            seed: 0,
            variant: None,
            formats: vec!["json".into(), "csv".into()],
        }
    }
}

const KEYS: &[&str] = &[
    "paths.train",
    "paths.test",
    "paths.schema",
    "paths.labels",
    "paths.out",
    "input.header",
    "input.unknown_label",
    "input.train_budget",
    "input.test_budget",
    "input.min_per_class",
    "features",
    "reducer",
    "reducer.lda.components",
    "reducer.lda.ridge",
    "reducer.gda.kernel",
    "reducer.gda.sigma",
    "reducer.gda.degree",
    "reducer.gda.offset",
    "reducer.gda.components",
    "reducer.gda.ridge",
    "reducer.gda.rank_tol",
    "reducer.gda.budget",
    "reducer.gda.min_per_class",
    "reducer.rank_features",
    "classifier",
    "classifier.tree.min_leaf",
    "classifier.tree.max_depth",
    "classifier.tree.min_gain",
    "classifier.mlp.hidden",
    "classifier.mlp.epochs",
    "classifier.mlp.rate",
    "classifier.mlp.batch",
    "seed",
    "report.variant",
    "report.formats",
];

/// Parses `key = value` lines; `#` starts a comment line. Relative paths
/// are resolved against `base`.
pub fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", n + 1)))?;
        let k = k.trim().to_ascii_lowercase();
        if !KEYS.contains(&k.as_str()) {
            return Err(Error::Config(format!("line {}: unknown key `{k}`", n + 1)));
        }
        if map.insert(k.clone(), v.trim().to_string()).is_some() {
            return Err(Error::Config(format!("line {}: duplicate key `{k}`", n + 1)));
        }
    }
    Ok(map)
}

fn num<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::Config(format!("`{key}`: cannot parse `{v}`")))
}

fn opt_num<T: FromStr>(key: &str, v: &str) -> Result<Option<T>> {
    if v.is_empty() || v.eq_ignore_ascii_case("none") {
        Ok(None)
    } else {
        num(key, v).map(Some)
    }
}

fn list(v: &str) -> Vec<String> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(String::from)
        .collect()
}

impl PipelineConfig {
    pub fn from_file(path: &Path) -> Result<PipelineConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::from(e).in_file(path))?;
        let base = path.parent().unwrap_or(Path::new(""));
        PipelineConfig::from_pairs(&parse_pairs(&text).map_err(|e| e.in_file(path))?, base)
            .map_err(|e| e.in_file(path))
    }

    pub fn parse(text: &str, base: &Path) -> Result<PipelineConfig> {
        PipelineConfig::from_pairs(&parse_pairs(text)?, base)
    }

    pub fn from_pairs(map: &BTreeMap<String, String>, base: &Path) -> Result<PipelineConfig> {
        let mut c = PipelineConfig::default();
        let path = |v: &str| {
            let p = PathBuf::from(v);
            if p.is_absolute() {
                p
            } else {
                base.join(p)
            }
        };
        let mut kernel = "gaussian".to_string();
        let mut sigma = 0.1;
        let mut degree = 2u32;
        let mut offset = 1.0;
        for (k, v) in map {
            let v = v.as_str();
            match k.as_str() {
                "paths.train" => c.train = Some(path(v)),
                "paths.test" => c.test = Some(path(v)),
                "paths.schema" => c.schema = Some(path(v)),
                "paths.labels" => c.labels = Some(path(v)),
                "paths.out" => c.out = path(v),
                "input.header" => c.header = num(k, v)?,
                "input.unknown_label" => {
                    c.unknown_label = if v.eq_ignore_ascii_case("error") {
                        UnknownPolicy::Error
                    } else {
                        UnknownPolicy::Assign(Category::parse(v).ok_or_else(|| {
                            Error::Config(format!("`{k}`: expected `error` or a category, got `{v}`"))
                        })?)
                    }
                }
                "input.train_budget" => c.train_budget = opt_num(k, v)?,
                "input.test_budget" => c.test_budget = opt_num(k, v)?,
                "input.min_per_class" => c.min_per_class = num(k, v)?,
                "features" => c.features = list(v),
                "reducer" => {
                    c.reducer = match v.to_ascii_lowercase().as_str() {
                        "none" => ReducerKind::None,
                        "lda" => ReducerKind::Lda,
                        "gda" => ReducerKind::Gda,
                        _ => return Err(Error::Config(format!("unknown reducer `{v}`"))),
                    }
                }
                "reducer.lda.components" => c.lda.components = num(k, v)?,
                "reducer.lda.ridge" => c.lda.ridge = opt_num(k, v)?,
                "reducer.gda.kernel" => kernel = v.to_ascii_lowercase(),
                "reducer.gda.sigma" => sigma = num(k, v)?,
                "reducer.gda.degree" => degree = num(k, v)?,
                "reducer.gda.offset" => offset = num(k, v)?,
                "reducer.gda.components" => c.gda.components = num(k, v)?,
                "reducer.gda.ridge" => c.gda.ridge = opt_num(k, v)?,
                "reducer.gda.rank_tol" => c.gda.rank_tol = num(k, v)?,
                "reducer.gda.budget" => c.gda.budget = num(k, v)?,
                "reducer.gda.min_per_class" => c.gda.min_per_class = num(k, v)?,
                "reducer.rank_features" => c.rank_features = num(k, v)?,
                "classifier" => {
                    c.classifier = match v.to_ascii_lowercase().as_str() {
                        "tree" | "c4.5" => ClassifierKind::Tree,
                        "mlp" | "ann" => ClassifierKind::Mlp,
                        _ => return Err(Error::Config(format!("unknown classifier `{v}`"))),
                    }
                }
                "classifier.tree.min_leaf" => c.tree.min_leaf = num(k, v)?,
                "classifier.tree.max_depth" => c.tree.max_depth = num(k, v)?,
                "classifier.tree.min_gain" => c.tree.min_gain = num(k, v)?,
                "classifier.mlp.hidden" => c.mlp.hidden = num(k, v)?,
                "classifier.mlp.epochs" => c.mlp.epochs = num(k, v)?,
                "classifier.mlp.rate" => c.mlp.rate = num(k, v)?,
                "classifier.mlp.batch" => c.mlp.batch = num(k, v)?,
                "seed" => c.seed = num(k, v)?,
                "report.variant" => c.variant = Some(v.to_string()),
                "report.formats" => c.formats = list(v).into_iter().map(|f| f.to_ascii_lowercase()).collect(),
                _ => return Err(Error::Config(format!("unknown key `{k}`"))),
            }
        }
        c.gda.kernel = match kernel.as_str() {
            "gaussian" | "rbf" => KernelSpec::Gaussian { denominator: sigma },
            "linear" => KernelSpec::Linear,
            "polynomial" | "poly" => KernelSpec::Polynomial { degree, offset },
            _ => return Err(Error::Config(format!("unknown kernel `{kernel}`"))),
        };
        c.set_seed(c.seed);
        c.check()?;
        Ok(c)
    }

    /// Propagates the master seed to the seeded stages.
    pub fn set_seed(&mut self, seed: u64) {
        self.seed = seed;
        self.mlp.seed = seed;
    }

    fn check(&self) -> Result<()> {
        self.gda.kernel.validate().map_err(|e| Error::Config(e.to_string()))?;
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.lda.components == 0 || self.gda.components == 0 {
            return bad("reducer components must be at least 1");
        }
        if self.gda.budget == 0 || self.gda.min_per_class == 0 || self.min_per_class == 0 {
            return bad("budgets and min_per_class must be positive");
        }
        if !(self.gda.rank_tol >= 0.0) {
            return bad("reducer.gda.rank_tol must be nonnegative");
        }
        if self.mlp.hidden == 0 || self.mlp.batch == 0 || !(self.mlp.rate > 0.0) {
            return bad("classifier.mlp hidden, batch and rate must be positive");
        }
        for f in &self.formats {
            if f != "json" && f != "csv" {
                return Err(Error::Config(format!("unknown report format `{f}`")));
            }
        }
        Ok(())
    }

    /// Checks that every configured input file exists, before any parsing.
    pub fn validate_paths(&self, need_data: bool) -> Result<()> {
        for (key, p) in [("paths.schema", &self.schema), ("paths.labels", &self.labels)] {
            if let Some(p) = p {
                if !p.is_file() {
                    return Err(Error::Config(format!("{key}: `{}` does not exist", p.display())));
                }
            }
        }
        if need_data {
            for (key, p) in [("paths.train", &self.train), ("paths.test", &self.test)] {
                match p {
                    None => return Err(Error::Config(format!("{key} is not set"))),
                    Some(p) if !p.is_file() => {
                        return Err(Error::Config(format!("{key}: `{}` does not exist", p.display())))
                    }
                    _ => {}
                }
            }
        }
        Ok(())
    }

    pub fn variant_name(&self) -> String {
        self.variant.clone().unwrap_or_else(|| {
            format!("{}+{}", self.reducer.as_str(), self.classifier.as_str())
        })
    }

    /// Resolved settings as sorted key/value pairs, for report echoes.
    /// Paths are omitted so reports do not depend on where they were run.
    pub fn echo(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        let mut put = |k: &str, v: String| {
            m.insert(k.to_string(), v);
        };
        put("input.header", self.header.to_string());
        put(
            "input.unknown_label",
            match self.unknown_label {
                UnknownPolicy::Error => "error".into(),
                UnknownPolicy::Assign(c) => c.name().into(),
            },
        );
        put("input.train_budget", fmt_opt(self.train_budget));
        put("input.test_budget", fmt_opt(self.test_budget));
        put("input.min_per_class", self.min_per_class.to_string());
        put("features", self.features.join(","));
        put("reducer", self.reducer.as_str().into());
        match self.reducer {
            ReducerKind::None => {}
            ReducerKind::Lda => {
                put("reducer.lda.components", self.lda.components.to_string());
                put("reducer.lda.ridge", fmt_opt(self.lda.ridge));
            }
            ReducerKind::Gda => {
                let (name, params) = match self.gda.kernel {
                    KernelSpec::Gaussian { denominator } => ("gaussian", format!("sigma={denominator}")),
                    KernelSpec::Linear => ("linear", String::new()),
                    KernelSpec::Polynomial { degree, offset } => {
                        ("polynomial", format!("degree={degree},offset={offset}"))
                    }
                };
                put("reducer.gda.kernel", name.into());
                put("reducer.gda.kernel_params", params);
                put("reducer.gda.components", self.gda.components.to_string());
                put("reducer.gda.ridge", fmt_opt(self.gda.ridge));
                put("reducer.gda.rank_tol", self.gda.rank_tol.to_string());
                put("reducer.gda.budget", self.gda.budget.to_string());
                put("reducer.gda.min_per_class", self.gda.min_per_class.to_string());
            }
        }
        put("classifier", self.classifier.as_str().into());
        match self.classifier {
            ClassifierKind::Tree => {
                put("classifier.tree.min_leaf", self.tree.min_leaf.to_string());
                put("classifier.tree.max_depth", self.tree.max_depth.to_string());
                put("classifier.tree.min_gain", self.tree.min_gain.to_string());
            }
            ClassifierKind::Mlp => {
                put("classifier.mlp.hidden", self.mlp.hidden.to_string());
                put("classifier.mlp.epochs", self.mlp.epochs.to_string());
                put("classifier.mlp.rate", self.mlp.rate.to_string());
                put("classifier.mlp.batch", self.mlp.batch.to_string());
            }
        }
        put("seed", self.seed.to_string());
        m
    }
}

fn fmt_opt<T: ToString>(v: Option<T>) -> String {
    v.map_or_else(|| "none".into(), |v| v.to_string())
}
