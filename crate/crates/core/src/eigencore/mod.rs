//! Dense symmetric eigen-solvers and kernel (Gram) matrix utilities.
//!
//! The symmetric decomposition itself is delegated to nalgebra's
//! tridiagonal QR solver; everything around it (ordering, sign
//! normalization, the Cholesky reduction of the generalized problem,
//! residual reporting) lives here.

mod kernel;

pub use kernel::{center_kernel, center_test_kernel, gram_matrix, CenteringStats, KernelSpec};

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// Relative threshold below which eigenvalues count as zero rank.
pub const RANK_TOL: f64 = 1e-10;

/// Square matrix checked for symmetry on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix(DMatrix<f64>);

impl SymmetricMatrix {
    /// Accepts `a` if `|a_ij - a_ji| <= 1e-12 * max(1, |a_ij|)`; the stored
    /// matrix is exactly symmetric.
    pub fn new(a: DMatrix<f64>) -> Result<SymmetricMatrix> {
        if !a.is_square() {
            return Err(Error::DimensionMismatch {
                expected: a.nrows(),
                found: a.ncols(),
            });
        }
        if a.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        let n = a.nrows();
        for j in 0..n {
            for i in (j + 1)..n {
                let diff = (a[(i, j)] - a[(j, i)]).abs();
                if diff > 1e-12 * a[(i, j)].abs().max(1.0) {
                    return Err(Error::NotSymmetric {
                        row: i,
                        col: j,
                        diff,
                    });
                }
            }
        }
        Ok(SymmetricMatrix::symmetrized(a))
    }

    /// `(a + aᵀ) / 2` without a tolerance check, for products that are
    /// symmetric in exact arithmetic.
    pub fn symmetrized(a: DMatrix<f64>) -> SymmetricMatrix {
        assert!(a.is_square(), "symmetrized requires a square matrix");
        let n = a.nrows();
        let mut s = a;
        for j in 0..n {
            for i in (j + 1)..n {
                let v = 0.5 * (s[(i, j)] + s[(j, i)]);
                s[(i, j)] = v;
                s[(j, i)] = v;
            }
        }
        SymmetricMatrix(s)
    }

    pub fn identity(n: usize) -> SymmetricMatrix {
        SymmetricMatrix(DMatrix::identity(n, n))
    }

    pub fn from_diagonal(d: &[f64]) -> SymmetricMatrix {
        SymmetricMatrix(DMatrix::from_diagonal(&DVector::from_column_slice(d)))
    }

    pub fn order(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }
}

impl std::ops::Deref for SymmetricMatrix {
    type Target = DMatrix<f64>;

    fn deref(&self) -> &DMatrix<f64> {
        &self.0
    }
}

/// Eigenvalues in non-increasing order with eigenvectors as matching columns.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenPairs {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
    /// Largest residual `‖A v − λ v‖` (or `‖A v − λ M v‖`) over all pairs.
    pub residual_bound: f64,
}

impl EigenPairs {
    /// Number of eigenvalues above `rel_tol * λ_max` (zero if `λ_max <= 0`).
    pub fn rank(&self, rel_tol: f64) -> usize {
        let top = self.values.first().copied().unwrap_or(0.0);
        if top <= 0.0 {
            return 0;
        }
        self.values.iter().filter(|&&v| v > rel_tol * top).count()
    }
}

/// Flips each column so its largest-magnitude entry (first on ties) is positive.
pub fn normalize_signs(v: &mut DMatrix<f64>) {
    for mut col in v.column_iter_mut() {
        let mut best = 0;
        for (i, x) in col.iter().enumerate() {
            if x.abs() > col[best].abs() {
                best = i;
            }
        }
        if col.len() > 0 && col[best] < 0.0 {
            col.neg_mut();
        }
    }
}

fn sorted_descending(eig: SymmetricEigen<f64, nalgebra::Dyn>) -> (Vec<f64>, DMatrix<f64>) {
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    // Stable sort keeps solver order for exactly equal eigenvalues.
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = eig.eigenvectors.select_columns(&order);
    (values, vectors)
}

fn max_residual(a: &DMatrix<f64>, m: Option<&DMatrix<f64>>, values: &[f64], v: &DMatrix<f64>) -> f64 {
    let av = a * v;
    let mv = match m {
        Some(m) => m * v,
        None => v.clone(),
    };
    values
        .iter()
        .enumerate()
        .map(|(k, &l)| (av.column(k) - mv.column(k) * l).norm())
        .fold(0.0, f64::max)
}

/// Full symmetric eigendecomposition, eigenvalues descending, unit eigenvectors.
pub fn sym_eig(a: &SymmetricMatrix) -> Result<EigenPairs> {
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    if a.order() == 0 {
        return Ok(EigenPairs {
            values: Vec::new(),
            vectors: DMatrix::zeros(0, 0),
            residual_bound: 0.0,
        });
    }
    let eig = SymmetricEigen::new(a.matrix().clone());
    let (values, mut vectors) = sorted_descending(eig);
    normalize_signs(&mut vectors);
    let residual_bound = max_residual(a.matrix(), None, &values, &vectors);
    Ok(EigenPairs {
        values,
        vectors,
        residual_bound,
    })
}

/// Default jitter `1e-8 · trace(M) / n`.
pub fn default_ridge(m: &SymmetricMatrix) -> f64 {
    if m.order() == 0 {
        return 0.0;
    }
    1e-8 * m.trace().abs() / m.order() as f64
}

/// Solves `A v = λ (M + ridge·I) v` by Cholesky reduction `M + ridge·I = L Lᵀ`,
/// `C = L⁻¹ A L⁻ᵀ`, `v = L⁻ᵀ y`. Eigenvectors are (M + ridge·I)-orthonormal.
pub fn generalized_sym_eig(a: &SymmetricMatrix, m: &SymmetricMatrix, ridge: f64) -> Result<EigenPairs> {
    if a.order() != m.order() {
        return Err(Error::DimensionMismatch {
            expected: a.order(),
            found: m.order(),
        });
    }
    if !(ridge >= 0.0) || !ridge.is_finite() {
        return Err(Error::InvalidArgument(format!("ridge must be nonnegative, got {ridge}")));
    }
    if a.iter().chain(m.iter()).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let n = a.order();
    let mut shifted = m.matrix().clone();
    for i in 0..n {
        shifted[(i, i)] += ridge;
    }
    let chol = shifted
        .clone()
        .cholesky()
        .ok_or(Error::NotPositiveDefinite { ridge })?;
    let l = chol.l();
    let y = l
        .solve_lower_triangular(a.matrix())
        .ok_or(Error::NotPositiveDefinite { ridge })?;
    let c = l
        .solve_lower_triangular(&y.transpose())
        .ok_or(Error::NotPositiveDefinite { ridge })?;
    let reduced = SymmetricMatrix::symmetrized(c);
    let eig = SymmetricEigen::new(reduced.into_inner());
    let (values, z) = sorted_descending(eig);
    let mut vectors = l
        .transpose()
        .solve_upper_triangular(&z)
        .ok_or(Error::NotPositiveDefinite { ridge })?;
    normalize_signs(&mut vectors);
    let residual_bound = max_residual(a.matrix(), Some(&shifted), &values, &vectors);
    Ok(EigenPairs {
        values,
        vectors,
        residual_bound,
    })
}
