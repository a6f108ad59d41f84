use nalgebra::DMatrix;

use crate::error::{Error, Result};

use super::SymmetricMatrix;

/// Positive-definite kernel families.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelSpec {
    /// `exp(−‖x − y‖² / denominator)`
    Gaussian { denominator: f64 },
    /// `xᵀy`
    Linear,
    /// `(xᵀy + offset)^degree`
    Polynomial { degree: u32, offset: f64 },
}

impl Default for KernelSpec {
    fn default() -> Self {
        KernelSpec::Gaussian { denominator: 0.1 }
    }
}

impl KernelSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            KernelSpec::Gaussian { denominator } if !(denominator > 0.0 && denominator.is_finite()) => {
                Err(Error::InvalidArgument(format!(
                    "gaussian denominator must be positive, got {denominator}"
                )))
            }
            KernelSpec::Polynomial { degree, offset } if degree < 1 || !offset.is_finite() => {
                Err(Error::InvalidArgument(format!(
                    "polynomial kernel needs degree >= 1 and finite offset, got ({degree}, {offset})"
                )))
            }
            _ => Ok(()),
        }
    }

    pub fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        match *self {
            KernelSpec::Gaussian { denominator } => {
                let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
                (-d2 / denominator).exp()
            }
            KernelSpec::Linear => dot(x, y),
            KernelSpec::Polynomial { degree, offset } => (dot(x, y) + offset).powi(degree as i32),
        }
    }

    /// Adds `weight · ∂k(x, y)/∂x` into `out`.
    pub fn accumulate_gradient(&self, x: &[f64], y: &[f64], weight: f64, out: &mut [f64]) {
        match *self {
            KernelSpec::Gaussian { denominator } => {
                let k = self.eval(x, y);
                let scale = -2.0 * weight * k / denominator;
                for ((o, a), b) in out.iter_mut().zip(x).zip(y) {
                    *o += scale * (a - b);
                }
            }
            KernelSpec::Linear => {
                for (o, b) in out.iter_mut().zip(y) {
                    *o += weight * b;
                }
            }
            KernelSpec::Polynomial { degree, offset } => {
                let base = dot(x, y) + offset;
                let scale = weight * degree as f64 * base.powi(degree as i32 - 1);
                for (o, b) in out.iter_mut().zip(y) {
                    *o += scale * b;
                }
            }
        }
    }
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

fn column_slice(m: &DMatrix<f64>, j: usize) -> &[f64] {
    let n = m.nrows();
    &m.as_slice()[j * n..(j + 1) * n]
}

/// `G[i][j] = k(x_i, y_j)` for the rows of `x` and `y`.
pub fn gram_matrix(x: &DMatrix<f64>, y: &DMatrix<f64>, spec: &KernelSpec) -> Result<DMatrix<f64>> {
    spec.validate()?;
    if x.ncols() != y.ncols() {
        return Err(Error::DimensionMismatch {
            expected: x.ncols(),
            found: y.ncols(),
        });
    }
    // Points as contiguous columns.
    let xt = x.transpose();
    let yt = y.transpose();
    Ok(DMatrix::from_fn(x.nrows(), y.nrows(), |i, j| {
        spec.eval(column_slice(&xt, i), column_slice(&yt, j))
    }))
}

/// Statistics of the training Gram matrix needed to center new kernel rows.
#[derive(Debug, Clone, PartialEq)]
pub struct CenteringStats {
    pub column_means: Vec<f64>,
    pub grand_mean: f64,
}

/// Double-centers a training Gram matrix: `K − 1K/M − K1/M + 1K1/M²`.
pub fn center_kernel(k: &SymmetricMatrix) -> (SymmetricMatrix, CenteringStats) {
    let m = k.order();
    if m == 0 {
        return (
            k.clone(),
            CenteringStats {
                column_means: Vec::new(),
                grand_mean: 0.0,
            },
        );
    }
    let means: Vec<f64> = (0..m).map(|j| k.column(j).sum() / m as f64).collect();
    let grand = means.iter().sum::<f64>() / m as f64;
    // (c_i + c_j) is symmetric in i, j so the result is exactly symmetric.
    let centered = DMatrix::from_fn(m, m, |i, j| k[(i, j)] - (means[i] + means[j]) + grand);
    (
        SymmetricMatrix::symmetrized(centered),
        CenteringStats {
            column_means: means,
            grand_mean: grand,
        },
    )
}

/// Centers kernel rows `K_test[i][j] = k(x_test_i, x_train_j)` consistently
/// with [`center_kernel`].
pub fn center_test_kernel(k_test: &DMatrix<f64>, stats: &CenteringStats) -> Result<DMatrix<f64>> {
    let m = stats.column_means.len();
    if k_test.ncols() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: k_test.ncols(),
        });
    }
    if m == 0 {
        return Ok(k_test.clone());
    }
    let row_means: Vec<f64> = (0..k_test.nrows())
        .map(|i| k_test.row(i).iter().sum::<f64>() / m as f64)
        .collect();
    Ok(DMatrix::from_fn(k_test.nrows(), m, |i, j| {
        k_test[(i, j)] - (row_means[i] + stats.column_means[j]) + stats.grand_mean
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(rows: usize, cols: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DMatrix::from_fn(rows, cols, |_, _| rng.gen_range(-1.0..1.0))
    }

    #[test]
    fn gaussian_unit_diagonal_and_default_width() {
        let x = random(6, 3, 1);
        let g = gram_matrix(&x, &x, &KernelSpec::default()).unwrap();
        for i in 0..6 {
            assert_eq!(g[(i, i)], 1.0);
        }
        let spec = KernelSpec::Gaussian { denominator: 0.1 };
        let v = spec.eval(&[0.0, 0.0], &[0.1f64.sqrt(), 0.0]);
        assert!((v - (-1.0f64).exp()).abs() < 1e-12);
        assert!((v - 0.367879).abs() < 1e-6);
    }

    #[test]
    fn linear_matches_dot_products() {
        let x = random(5, 3, 2);
        let y = random(4, 3, 3);
        let g = gram_matrix(&x, &y, &KernelSpec::Linear).unwrap();
        for i in 0..5 {
            for j in 0..4 {
                let mut s = 0.0;
                for k in 0..3 {
                    s += x[(i, k)] * y[(j, k)];
                }
                assert!((g[(i, j)] - s).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn polynomial_and_validation() {
        let spec = KernelSpec::Polynomial { degree: 2, offset: 1.0 };
        assert_eq!(spec.eval(&[1.0, 2.0], &[3.0, 1.0]), 36.0);
        assert!(KernelSpec::Gaussian { denominator: 0.0 }.validate().is_err());
        assert!(KernelSpec::Polynomial { degree: 0, offset: 0.0 }.validate().is_err());
    }

    #[test]
    fn dimension_mismatch() {
        assert!(gram_matrix(&random(2, 3, 1), &random(2, 4, 1), &KernelSpec::Linear).is_err());
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let x = [0.3, -0.2, 0.5];
        let y = [0.1, 0.4, -0.3];
        for spec in [
            KernelSpec::Gaussian { denominator: 0.7 },
            KernelSpec::Linear,
            KernelSpec::Polynomial { degree: 3, offset: 0.5 },
        ] {
            let mut g = [0.0; 3];
            spec.accumulate_gradient(&x, &y, 1.0, &mut g);
            for j in 0..3 {
                let h = 1e-6;
                let mut xp = x;
                let mut xm = x;
                xp[j] += h;
                xm[j] -= h;
                let fd = (spec.eval(&xp, &y) - spec.eval(&xm, &y)) / (2.0 * h);
                assert!((fd - g[j]).abs() < 1e-7, "{spec:?} {j}");
            }
        }
    }

    #[test]
    fn centered_rows_sum_to_zero() {
        let x = random(10, 4, 5);
        let k = SymmetricMatrix::new(gram_matrix(&x, &x, &KernelSpec::default()).unwrap()).unwrap();
        let (kc, stats) = center_kernel(&k);
        for i in 0..10 {
            assert!(kc.row(i).sum().abs() < 1e-10);
            assert!(kc.column(i).sum().abs() < 1e-10);
        }
        let mean_of_means = stats.column_means.iter().sum::<f64>() / 10.0;
        assert!((stats.grand_mean - mean_of_means).abs() < 1e-15);
        // idempotent
        let (kcc, _) = center_kernel(&kc);
        assert!((kcc.matrix() - kc.matrix()).amax() < 1e-12);
    }

    #[test]
    fn identical_rows_center_to_zero() {
        let x = DMatrix::from_fn(5, 3, |_, j| j as f64 + 0.5);
        let k = SymmetricMatrix::new(gram_matrix(&x, &x, &KernelSpec::Linear).unwrap()).unwrap();
        let (kc, _) = center_kernel(&k);
        assert!(kc.amax() < 1e-12);
    }

    #[test]
    fn test_centering_matches_training_rows() {
        let x = random(8, 3, 7);
        let spec = KernelSpec::Gaussian { denominator: 0.5 };
        let k = SymmetricMatrix::new(gram_matrix(&x, &x, &spec).unwrap()).unwrap();
        let (kc, stats) = center_kernel(&k);
        let rows = x.select_rows(&[2, 5]);
        let kt = gram_matrix(&rows, &x, &spec).unwrap();
        let ktc = center_test_kernel(&kt, &stats).unwrap();
        assert_eq!(ktc.row(0), kc.row(2));
        assert_eq!(ktc.row(1), kc.row(5));
    }

    #[test]
    fn constant_test_kernel_centers_to_zero() {
        let stats = CenteringStats {
            column_means: vec![0.25; 4],
            grand_mean: 0.25,
        };
        let kt = DMatrix::from_element(3, 4, 0.25);
        assert!(center_test_kernel(&kt, &stats).unwrap().amax() < 1e-15);
        assert!(center_test_kernel(&DMatrix::zeros(1, 3), &stats).is_err());
    }
}
