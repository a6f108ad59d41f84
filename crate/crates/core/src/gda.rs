//! Generalized (kernel) discriminant analysis.
//!
//! Works entirely through the centered Gram matrix `K'` of the training
//! basis and the block-diagonal class-averaging matrix `D`. A component is a
//! coefficient vector `α` over the basis maximizing
//! `λ = αᵀK'DK'α / αᵀK'K'α`; a point `x` projects to
//! `Σ_j α_j k'(x_j, x)`.
//!
//! The problem is solved in the eigenbasis of `K'` restricted to eigenvalues
//! above `rank_tol · γ_max` (the denominator is singular elsewhere): with
//! `K' ≈ P Γ Pᵀ` and `α = P a` it reads
//! `Γ PᵀDP Γ a = λ (Γ² + ridge·I) a`.

use nalgebra::DMatrix;

use crate::dataset::{FeatureGroup, NumericDataset};
use crate::eigencore::{
    center_kernel, center_test_kernel, generalized_sym_eig, gram_matrix, sym_eig, CenteringStats,
    KernelSpec, SymmetricMatrix, RANK_TOL,
};
use crate::error::{Error, Result};
use crate::lda::{rank_groups, FeatureScore};

/// `D` for rows grouped contiguously by class: the class-`c` diagonal block
/// has every entry equal to `1 / M_c`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockDiagD {
    sizes: Vec<usize>,
}

impl BlockDiagD {
    pub fn new(sizes: Vec<usize>) -> Result<BlockDiagD> {
        if sizes.is_empty() {
            return Err(Error::InvalidArgument("D needs at least one class".into()));
        }
        if let Some(c) = sizes.iter().position(|&s| s == 0) {
            return Err(Error::EmptyClass(format!("#{c}")));
        }
        Ok(BlockDiagD { sizes })
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn order(&self) -> usize {
        self.sizes.iter().sum()
    }

    pub fn dense(&self) -> DMatrix<f64> {
        let n = self.order();
        let mut d = DMatrix::zeros(n, n);
        let mut start = 0;
        for &s in &self.sizes {
            let v = 1.0 / s as f64;
            d.view_mut((start, start), (s, s)).fill(v);
            start += s;
        }
        d
    }

    /// `D · V`: every row replaced by the mean of its class block.
    pub fn apply(&self, v: &DMatrix<f64>) -> DMatrix<f64> {
        assert_eq!(v.nrows(), self.order(), "D applied to wrong row count");
        let mut out = DMatrix::zeros(v.nrows(), v.ncols());
        let mut start = 0;
        for &s in &self.sizes {
            let block = v.rows(start, s);
            let mean = block.row_sum() / s as f64;
            for r in start..start + s {
                out.row_mut(r).copy_from(&mean);
            }
            start += s;
        }
        out
    }
}

/// Builds `D` from class sizes and the class of every basis row. Rows must
/// be grouped contiguously by class in class-id order.
pub fn build_d_matrix(class_sizes: &[usize], row_classes: &[usize]) -> Result<BlockDiagD> {
    let d = BlockDiagD::new(class_sizes.to_vec())?;
    if row_classes.len() != d.order() {
        return Err(Error::DimensionMismatch {
            expected: d.order(),
            found: row_classes.len(),
        });
    }
    let mut start = 0;
    for (c, &s) in class_sizes.iter().enumerate() {
        if row_classes[start..start + s].iter().any(|&l| l != c) {
            return Err(Error::InvalidArgument(format!(
                "rows of class {c} are not contiguous at positions {start}..{}",
                start + s
            )));
        }
        start += s;
    }
    Ok(d)
}

/// `αᵀK'DK'α / αᵀK'K'α`.
pub fn rayleigh_quotient(k_centered: &SymmetricMatrix, d: &BlockDiagD, alpha: &[f64]) -> Result<f64> {
    let n = k_centered.order();
    if d.order() != n || alpha.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: if d.order() != n { d.order() } else { alpha.len() },
        });
    }
    let a = DMatrix::from_column_slice(n, 1, alpha);
    let ka = k_centered.matrix() * &a;
    let den = ka.norm_squared();
    if den.sqrt() <= 1e-13 * k_centered.norm() * a.norm() || den == 0.0 {
        return Err(Error::ZeroDenominator);
    }
    let num = (ka.transpose() * d.apply(&ka))[(0, 0)];
    Ok(num / den)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GdaParams {
    pub kernel: KernelSpec,
    pub components: usize,
    /// Jitter on the denominator `Γ²`; `None` means none. The retained range
    /// already makes `Γ²` positive definite, and any ridge shifts the fitted
    /// eigenvalues away from the plain ratio `αᵀK'DK'α / αᵀK'K'α`.
    pub ridge: Option<f64>,
    /// Relative cut-off on the eigenvalues of `K'`.
    pub rank_tol: f64,
}

impl Default for GdaParams {
    fn default() -> Self {
        GdaParams {
            kernel: KernelSpec::default(),
            components: 4,
            ridge: None,
            rank_tol: RANK_TOL,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GdaModel {
    /// Training rows, grouped by class.
    pub basis: DMatrix<f64>,
    pub basis_labels: Vec<usize>,
    /// `permutation[k]` is the input row index of basis row `k`.
    pub permutation: Vec<usize>,
    pub class_sizes: Vec<usize>,
    pub class_names: Vec<String>,
    pub kernel: KernelSpec,
    /// basis rows × components.
    pub alphas: DMatrix<f64>,
    pub eigenvalues: Vec<f64>,
    /// `None` projects with the raw (uncentered) kernel.
    pub centering: Option<CenteringStats>,
    pub ridge: f64,
    pub rank_tol: f64,
    /// Rank of `K'` retained during the fit.
    pub kernel_rank: usize,
    pub groups: Vec<FeatureGroup>,
    pub column_names: Vec<String>,
}

impl GdaModel {
    pub fn components(&self) -> usize {
        self.alphas.ncols()
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    /// Centered training Gram matrix of the basis.
    pub fn centered_gram(&self) -> Result<SymmetricMatrix> {
        let k = SymmetricMatrix::symmetrized(gram_matrix(&self.basis, &self.basis, &self.kernel)?);
        Ok(match self.centering {
            Some(_) => center_kernel(&k).0,
            None => k,
        })
    }

    pub fn d_matrix(&self) -> Result<BlockDiagD> {
        build_d_matrix(&self.class_sizes, &self.basis_labels)
    }
}

pub fn fit_gda(ds: &NumericDataset, params: &GdaParams) -> Result<GdaModel> {
    params.kernel.validate()?;
    if params.components == 0 {
        return Err(Error::InvalidArgument("at least one component required".into()));
    }
    if !(params.rank_tol >= 0.0) {
        return Err(Error::InvalidArgument("rank_tol must be nonnegative".into()));
    }
    let c = ds.class_count();
    if c < 2 {
        return Err(Error::InvalidArgument(format!("GDA needs at least 2 classes, got {c}")));
    }
    let sizes = ds.class_sizes();
    if let Some(e) = sizes.iter().position(|&s| s == 0) {
        return Err(Error::EmptyClass(ds.class_names[e].clone()));
    }

    let (grouped, permutation) = ds.grouped_by_class();
    let d = build_d_matrix(&sizes, &grouped.labels)?;
    let k = SymmetricMatrix::symmetrized(gram_matrix(&grouped.x, &grouped.x, &params.kernel)?);
    let (kc, stats) = center_kernel(&k);

    let spectrum = sym_eig(&kc)?;
    let top = spectrum.values.first().copied().unwrap_or(0.0);
    let m = kc.order();
    if !(top > f64::EPSILON * m as f64 * k.amax()) {
        return Err(Error::DegenerateKernel);
    }
    let rank = spectrum.rank(params.rank_tol);
    let p = spectrum.vectors.columns(0, rank).into_owned();
    let gamma = &spectrum.values[..rank];

    // Γ (PᵀDP) Γ and Γ².
    let ptdp = p.transpose() * d.apply(&p);
    let numerator = DMatrix::from_fn(rank, rank, |i, j| gamma[i] * ptdp[(i, j)] * gamma[j]);
    let denominator: Vec<f64> = gamma.iter().map(|g| g * g).collect();
    let ridge = params.ridge.unwrap_or(0.0);
    let pairs = generalized_sym_eig(
        &SymmetricMatrix::symmetrized(numerator),
        &SymmetricMatrix::from_diagonal(&denominator),
        ridge,
    )?;

    let keep = pairs
        .values
        .iter()
        .take(params.components.min(c - 1))
        .take_while(|&&l| l > params.rank_tol)
        .count();

    let mut alphas = DMatrix::zeros(m, keep);
    for i in 0..keep {
        let a = pairs.vectors.column(i);
        // αᵀK'α = aᵀΓa for α = P a.
        let norm2: f64 = a.iter().zip(gamma).map(|(x, g)| g * x * x).sum();
        let mut alpha = &p * a / norm2.sqrt();
        // Sign: the largest-magnitude training projection is positive.
        let proj = kc.matrix() * &alpha;
        let mut best = 0;
        for (r, v) in proj.iter().enumerate() {
            if v.abs() > proj[best].abs() {
                best = r;
            }
        }
        if proj[best] < 0.0 {
            alpha.neg_mut();
        }
        alphas.set_column(i, &alpha);
    }

    Ok(GdaModel {
        basis: grouped.x,
        basis_labels: grouped.labels,
        permutation,
        class_sizes: sizes,
        class_names: ds.class_names.clone(),
        kernel: params.kernel,
        alphas,
        eigenvalues: pairs.values[..keep].to_vec(),
        centering: Some(stats),
        ridge,
        rank_tol: params.rank_tol,
        kernel_rank: rank,
        groups: ds.groups.clone(),
        column_names: ds.column_names.clone(),
    })
}

/// Centered kernel rows of `x` against the basis.
fn test_kernel(model: &GdaModel, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if x.ncols() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            found: x.ncols(),
        });
    }
    let kt = gram_matrix(x, &model.basis, &model.kernel)?;
    match &model.centering {
        Some(stats) => center_test_kernel(&kt, stats),
        None => Ok(kt),
    }
}

/// Rows × components projection of `x`.
pub fn project_gda(model: &GdaModel, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    Ok(test_kernel(model, x)? * &model.alphas)
}

/// Ranks original features by the mean absolute derivative of the
/// projections with respect to each input column, over the rows of `ds`.
pub fn rank_features_gda(model: &GdaModel, ds: &NumericDataset) -> Result<Vec<FeatureScore>> {
    let scores = gda_sensitivity(model, &ds.x)?;
    Ok(rank_groups(&model.groups, &scores))
}

/// Per-column sensitivity `mean_{x, i} |∂ projection_i(x) / ∂x_j|`.
pub fn gda_sensitivity(model: &GdaModel, x: &DMatrix<f64>) -> Result<Vec<f64>> {
    let d = model.dim();
    if x.ncols() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: x.ncols(),
        });
    }
    let (m, r) = (model.basis.nrows(), model.components());
    if r == 0 || x.nrows() == 0 {
        return Ok(vec![0.0; d]);
    }
    // With centering, projection_i(x) = Σ_j (α_ji − S_i/M) k(x, b_j) + const.
    let mut weights = model.alphas.clone();
    if model.centering.is_some() {
        for i in 0..r {
            let mean = weights.column(i).sum() / m as f64;
            weights.column_mut(i).add_scalar_mut(-mean);
        }
    }
    let basis_t = model.basis.transpose();
    let x_t = x.transpose();
    let mut totals = vec![0.0; d];
    let mut grad = vec![0.0; d];
    for n in 0..x.nrows() {
        let xn = &x_t.as_slice()[n * d..(n + 1) * d];
        for i in 0..r {
            grad.iter_mut().for_each(|g| *g = 0.0);
            for j in 0..m {
                let bj = &basis_t.as_slice()[j * d..(j + 1) * d];
                model.kernel.accumulate_gradient(xn, bj, weights[(j, i)], &mut grad);
            }
            for (t, g) in totals.iter_mut().zip(&grad) {
                *t += g.abs();
            }
        }
    }
    let count = (x.nrows() * r) as f64;
    Ok(totals.into_iter().map(|t| t / count).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn blobs(n: usize, seed: u64) -> NumericDataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for i in 0..n {
            let c = i % 3;
            rows.push(vec![
                c as f64 + rng.gen_range(-0.6..0.6),
                rng.gen_range(-1.0..1.0),
                (c as f64 * 0.5).sin() + rng.gen_range(-0.3..0.3),
            ]);
            labels.push(c);
        }
        NumericDataset::from_rows(&rows, &labels, 3).unwrap()
    }

    #[test]
    fn d_blocks() {
        let d = build_d_matrix(&[2, 3], &[0, 0, 1, 1, 1]).unwrap();
        let m = d.dense();
        for i in 0..5 {
            for j in 0..5 {
                let expected = match (i < 2, j < 2) {
                    (true, true) => 0.5,
                    (false, false) => 1.0 / 3.0,
                    _ => 0.0,
                };
                assert_eq!(m[(i, j)], expected);
            }
            assert!((m.row(i).sum() - 1.0).abs() < 1e-15);
        }
        assert!((&m * &m - &m).amax() < 1e-12);
        assert!((m.trace() - 2.0).abs() < 1e-15);
        assert_eq!(d.apply(&DMatrix::identity(5, 5)), m);
    }

    #[test]
    fn d_of_singletons_is_identity() {
        let d = build_d_matrix(&[1, 1, 1], &[0, 1, 2]).unwrap();
        assert_eq!(d.dense(), DMatrix::identity(3, 3));
    }

    #[test]
    fn d_rejects_bad_layout() {
        assert!(build_d_matrix(&[2, 0], &[0, 0]).is_err());
        assert!(build_d_matrix(&[2, 1], &[0, 1, 0]).is_err());
        assert!(build_d_matrix(&[2, 1], &[0, 0]).is_err());
    }

    #[test]
    fn fitted_components_are_normalized_and_consistent() {
        let ds = blobs(30, 4);
        let model = fit_gda(
            &ds,
            &GdaParams {
                kernel: KernelSpec::Gaussian { denominator: 1.0 },
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(model.components(), 2);
        let kc = model.centered_gram().unwrap();
        let d = model.d_matrix().unwrap();
        for i in 0..model.components() {
            let a = model.alphas.column(i);
            let norm = (a.transpose() * kc.matrix() * a)[(0, 0)];
            assert!((norm - 1.0).abs() < 1e-8);
            let rq = rayleigh_quotient(&kc, &d, a.as_slice()).unwrap();
            assert!((rq - model.eigenvalues[i]).abs() <= 1e-7 * model.eigenvalues[i]);
            assert!(model.eigenvalues[i] <= 1.0 + 1e-8);
        }
        let train = project_gda(&model, &model.basis).unwrap();
        let direct = kc.matrix() * &model.alphas;
        assert!((train - direct).amax() < 1e-9);
    }

    #[test]
    fn one_sample_per_class_saturates() {
        let ds = NumericDataset::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.3]], &[0, 1], 2).unwrap();
        let model = fit_gda(&ds, &GdaParams { ridge: Some(0.0), ..Default::default() }).unwrap();
        assert!((model.eigenvalues[0] - 1.0).abs() < 1e-8);
    }

    #[test]
    fn identical_classes_carry_no_signal() {
        let pts = [vec![0.0, 0.0], vec![1.0, 0.2], vec![0.3, 0.9]];
        let rows: Vec<Vec<f64>> = pts.iter().chain(pts.iter()).cloned().collect();
        let ds = NumericDataset::from_rows(&rows, &[0, 0, 0, 1, 1, 1], 2).unwrap();
        let model = fit_gda(&ds, &GdaParams::default()).unwrap();
        assert!(model.eigenvalues.iter().all(|&l| l < 1e-6));
    }

    #[test]
    fn degenerate_kernel_errors() {
        let ds = NumericDataset::from_rows(&[vec![1.0], vec![1.0], vec![1.0]], &[0, 1, 1], 2).unwrap();
        assert!(matches!(fit_gda(&ds, &GdaParams::default()), Err(Error::DegenerateKernel)));
    }

    #[test]
    fn single_basis_vector_uncentered() {
        let ds = blobs(6, 1);
        let mut model = fit_gda(&ds, &GdaParams::default()).unwrap();
        model.basis = DMatrix::from_row_slice(1, 3, &[0.1, 0.2, 0.3]);
        model.alphas = DMatrix::from_element(1, 1, 1.0);
        model.centering = None;
        let x = DMatrix::from_row_slice(1, 3, &[0.0, 0.5, -0.1]);
        let p = project_gda(&model, &x).unwrap();
        let k = model.kernel.eval(&[0.1, 0.2, 0.3], &[0.0, 0.5, -0.1]);
        assert_eq!(p[(0, 0)], k);
    }

    #[test]
    fn null_space_alpha_has_zero_denominator() {
        let ds = blobs(9, 2);
        let model = fit_gda(&ds, &GdaParams::default()).unwrap();
        let kc = model.centered_gram().unwrap();
        let d = model.d_matrix().unwrap();
        // K' annihilates the constant vector.
        let ones = vec![1.0; kc.order()];
        assert!(matches!(rayleigh_quotient(&kc, &d, &ones), Err(Error::ZeroDenominator)));
    }

    #[test]
    fn projection_dimension_checked() {
        let model = fit_gda(&blobs(9, 3), &GdaParams::default()).unwrap();
        assert!(project_gda(&model, &DMatrix::zeros(2, 2)).is_err());
    }

    #[test]
    fn zeroed_feature_has_zero_sensitivity() {
        let mut ds = blobs(24, 5);
        ds.x.column_mut(1).fill(0.0);
        let model = fit_gda(
            &ds,
            &GdaParams {
                kernel: KernelSpec::Gaussian { denominator: 2.0 },
                ..Default::default()
            },
        )
        .unwrap();
        let ranking = rank_features_gda(&model, &ds).unwrap();
        let f2 = ranking.iter().find(|s| s.name == "f2").unwrap();
        assert_eq!(f2.score, 0.0);
    }
}
