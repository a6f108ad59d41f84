//! Linear discriminant analysis.
//!
//! Between-class scatter `B = Σ_c M_c (m_c − m)(m_c − m)ᵀ` and within-class
//! scatter `W = Σ_c Σ_{x∈X_c} (x − m_c)(x − m_c)ᵀ`; discriminant directions
//! are the leading solutions of `B u = λ (W + ridge·I) u`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::dataset::{FeatureGroup, NumericDataset};
use crate::eigencore::{default_ridge, generalized_sym_eig, SymmetricMatrix, RANK_TOL};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ScatterPair {
    pub between: SymmetricMatrix,
    pub within: SymmetricMatrix,
    /// One row per class.
    pub class_means: DMatrix<f64>,
    pub global_mean: DVector<f64>,
    pub class_sizes: Vec<usize>,
}

pub fn scatter_matrices(ds: &NumericDataset) -> Result<ScatterPair> {
    let (m, d) = (ds.rows(), ds.dim());
    if m < 2 {
        return Err(Error::InvalidArgument(format!(
            "scatter matrices need at least 2 samples, got {m}"
        )));
    }
    let sizes = ds.class_sizes();
    if let Some(c) = sizes.iter().position(|&s| s == 0) {
        return Err(Error::EmptyClass(ds.class_names[c].clone()));
    }
    let c = sizes.len();

    let mut sums = DMatrix::<f64>::zeros(c, d);
    for (i, &l) in ds.labels.iter().enumerate() {
        let mut row = sums.row_mut(l);
        row += ds.x.row(i);
    }
    let mut class_means = sums;
    for (k, &n) in sizes.iter().enumerate() {
        class_means.row_mut(k).unscale_mut(n as f64);
    }
    let global_mean: DVector<f64> = ds.x.row_sum().transpose() / m as f64;

    let mut between = DMatrix::<f64>::zeros(d, d);
    for (k, &n) in sizes.iter().enumerate() {
        let diff = class_means.row(k).transpose() - &global_mean;
        between.ger(n as f64, &diff, &diff, 1.0);
    }

    // Deviations from the class mean, then W = Δᵀ Δ.
    let mut dev = ds.x.clone();
    for (i, &l) in ds.labels.iter().enumerate() {
        let mut row = dev.row_mut(i);
        row -= class_means.row(l);
    }
    let within = dev.transpose() * &dev;

    Ok(ScatterPair {
        between: SymmetricMatrix::symmetrized(between),
        within: SymmetricMatrix::symmetrized(within),
        class_means,
        global_mean,
        class_sizes: sizes,
    })
}

/// Total scatter `Σ_x (x − m)(x − m)ᵀ`.
pub fn total_scatter(ds: &NumericDataset) -> SymmetricMatrix {
    let mean = ds.x.row_sum() / ds.rows() as f64;
    let mut dev = ds.x.clone();
    for mut row in dev.row_iter_mut() {
        row -= &mean;
    }
    SymmetricMatrix::symmetrized(dev.transpose() * &dev)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LdaModel {
    /// d × r, columns are discriminant directions.
    pub projection: DMatrix<f64>,
    /// Descending.
    pub eigenvalues: Vec<f64>,
    pub ridge: f64,
    pub scatter: ScatterPair,
    pub groups: Vec<FeatureGroup>,
    pub column_names: Vec<String>,
}

impl LdaModel {
    pub fn components(&self) -> usize {
        self.projection.ncols()
    }

    pub fn dim(&self) -> usize {
        self.projection.nrows()
    }
}

/// Fits up to `components` directions; at most `C − 1` and the numerical
/// rank of the problem are kept. `ridge = None` uses `1e-8 · trace(W) / d`.
pub fn fit_lda(ds: &NumericDataset, components: usize, ridge: Option<f64>) -> Result<LdaModel> {
    if components == 0 {
        return Err(Error::InvalidArgument("at least one component required".into()));
    }
    if ds.class_count() < 2 {
        return Err(Error::InvalidArgument(format!(
            "LDA needs at least 2 classes, got {}",
            ds.class_count()
        )));
    }
    let scatter = scatter_matrices(ds)?;
    let ridge = ridge.unwrap_or_else(|| lda_default_ridge(&scatter));
    let pairs = generalized_sym_eig(&scatter.between, &scatter.within, ridge)?;
    let keep = components
        .min(ds.class_count() - 1)
        .min(pairs.rank(RANK_TOL));
    let projection = pairs.vectors.columns(0, keep).into_owned();
    Ok(LdaModel {
        projection,
        eigenvalues: pairs.values[..keep].to_vec(),
        ridge,
        scatter,
        groups: ds.groups.clone(),
        column_names: ds.column_names.clone(),
    })
}

/// `1e-8 · trace(W) / d`, falling back to the total scatter when `W = 0`.
fn lda_default_ridge(scatter: &ScatterPair) -> f64 {
    let r = default_ridge(&scatter.within);
    if r > 0.0 {
        return r;
    }
    let d = scatter.between.order().max(1) as f64;
    let total = scatter.between.trace() + scatter.within.trace();
    if total > 0.0 {
        1e-8 * total / d
    } else {
        1e-8
    }
}

/// `(X − 1mᵀ) U`.
pub fn project_lda(model: &LdaModel, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if x.ncols() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            found: x.ncols(),
        });
    }
    let mean = model.scatter.global_mean.transpose();
    let mut centered = x.clone();
    for mut row in centered.row_iter_mut() {
        row -= &mean;
    }
    Ok(centered * &model.projection)
}

/// Score of an original feature, highest first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureScore {
    pub name: String,
    /// Index of the feature group in the dataset it came from.
    pub index: usize,
    pub score: f64,
}

/// Sorts descending by score, ties broken by feature index.
pub(crate) fn rank_groups(groups: &[FeatureGroup], column_scores: &[f64]) -> Vec<FeatureScore> {
    let mut scores: Vec<FeatureScore> = groups
        .iter()
        .enumerate()
        .map(|(i, g)| FeatureScore {
            name: g.name.clone(),
            index: i,
            score: g.columns().map(|c| column_scores[c]).sum(),
        })
        .collect();
    scores.sort_by(|a, b| b.score.total_cmp(&a.score).then(a.index.cmp(&b.index)));
    scores
}

/// Ranks original features by `Σ_i λ_i U[j][i]²`, one-hot blocks summed.
pub fn rank_features_lda(model: &LdaModel) -> Vec<FeatureScore> {
    let column_scores: Vec<f64> = (0..model.dim())
        .map(|j| {
            model
                .eigenvalues
                .iter()
                .enumerate()
                .map(|(i, l)| l * model.projection[(j, i)].powi(2))
                .sum()
        })
        .collect();
    rank_groups(&model.groups, &column_scores)
}
