use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataset::NumericDataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MlpConfig {
    pub hidden: usize,
    pub epochs: usize,
    pub rate: f64,
    pub batch: usize,
    pub seed: u64,
    /// Start from all-zero weights instead of the seeded uniform draw.
    pub zero_init: bool,
}

impl MlpConfig {
    pub fn new(seed: u64) -> MlpConfig {
        MlpConfig {
            hidden: 20,
            epochs: 50,
            rate: 0.1,
            batch: 32,
            seed,
            zero_init: false,
        }
    }
}

/// One sigmoid hidden layer, softmax output.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    /// hidden × input
    pub w1: DMatrix<f64>,
    pub b1: DVector<f64>,
    /// classes × hidden
    pub w2: DMatrix<f64>,
    pub b2: DVector<f64>,
    pub class_names: Vec<String>,
    pub config: MlpConfig,
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Row-wise softmax with max subtraction.
pub fn softmax_rows(logits: &DMatrix<f64>) -> DMatrix<f64> {
    let mut p = logits.clone();
    for mut row in p.row_iter_mut() {
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        row.apply(|v| *v = (*v - max).exp());
        let s = row.sum();
        row /= s;
    }
    p
}

impl MlpModel {
    pub fn init(inputs: usize, classes: usize, config: &MlpConfig, rng: &mut ChaCha8Rng) -> MlpModel {
        let h = config.hidden;
        let mut draw = |rows: usize, cols: usize, fan_in: usize| {
            if config.zero_init {
                return DMatrix::zeros(rows, cols);
            }
            let a = 1.0 / (fan_in.max(1) as f64).sqrt();
            DMatrix::from_fn(rows, cols, |_, _| rng.gen_range(-a..=a))
        };
        let w1 = draw(h, inputs, inputs);
        let b1 = draw(h, 1, inputs);
        let w2 = draw(classes, h, h);
        let b2 = draw(classes, 1, h);
        MlpModel {
            w1,
            b1: b1.column(0).into_owned(),
            w2,
            b2: b2.column(0).into_owned(),
            class_names: Vec::new(),
            config: *config,
        }
    }

    pub fn inputs(&self) -> usize {
        self.w1.ncols()
    }

    pub fn hidden(&self) -> usize {
        self.w1.nrows()
    }

    pub fn classes(&self) -> usize {
        self.w2.nrows()
    }

    fn hidden_activations(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        let mut a = x * self.w1.transpose();
        for mut row in a.row_iter_mut() {
            row += self.b1.transpose();
            row.apply(|v| *v = sigmoid(*v));
        }
        a
    }

    pub fn logits(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        let a = self.hidden_activations(x);
        let mut z = a * self.w2.transpose();
        for mut row in z.row_iter_mut() {
            row += self.b2.transpose();
        }
        z
    }

    /// Flattened parameters: w1, b1, w2, b2 (matrices column-major).
    pub fn parameters(&self) -> Vec<f64> {
        [self.w1.as_slice(), self.b1.as_slice(), self.w2.as_slice(), self.b2.as_slice()].concat()
    }

    pub fn set_parameters(&mut self, p: &[f64]) -> Result<()> {
        let n = self.parameters().len();
        if p.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: p.len(),
            });
        }
        let mut off = 0;
        for dst in [
            self.w1.as_mut_slice(),
            self.b1.as_mut_slice(),
            self.w2.as_mut_slice(),
            self.b2.as_mut_slice(),
        ] {
            dst.copy_from_slice(&p[off..off + dst.len()]);
            off += dst.len();
        }
        Ok(())
    }

    /// Mean cross-entropy over the rows of `x` and its gradient in
    /// [`MlpModel::parameters`] order.
    pub fn loss_and_gradient(&self, x: &DMatrix<f64>, labels: &[usize]) -> Result<(f64, Vec<f64>)> {
        self.check_input(x)?;
        if labels.len() != x.nrows() || x.nrows() == 0 {
            return Err(Error::DimensionMismatch {
                expected: x.nrows(),
                found: labels.len(),
            });
        }
        if let Some(&bad) = labels.iter().find(|&&c| c >= self.classes()) {
            return Err(Error::InvalidArgument(format!("class id {bad} out of range")));
        }
        let n = x.nrows() as f64;
        let a = self.hidden_activations(x);
        let mut z = &a * self.w2.transpose();
        for mut row in z.row_iter_mut() {
            row += self.b2.transpose();
        }
        let mut dz = softmax_rows(&z);
        let mut loss = 0.0;
        for (i, &c) in labels.iter().enumerate() {
            let row = z.row(i);
            let max = row.max();
            let lse = max + row.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
            loss += lse - z[(i, c)];
            dz[(i, c)] -= 1.0;
        }
        dz /= n;
        let dw2 = dz.transpose() * &a;
        let db2: DVector<f64> = dz.row_sum().transpose();
        let mut dh = &dz * &self.w2;
        dh.zip_apply(&a, |g, s| *g *= s * (1.0 - s));
        let dw1 = dh.transpose() * x;
        let db1: DVector<f64> = dh.row_sum().transpose();
        let grad = [dw1.as_slice(), db1.as_slice(), dw2.as_slice(), db2.as_slice()].concat();
        Ok((loss / n, grad))
    }

    fn check_input(&self, x: &DMatrix<f64>) -> Result<()> {
        if x.ncols() != self.inputs() {
            return Err(Error::DimensionMismatch {
                expected: self.inputs(),
                found: x.ncols(),
            });
        }
        Ok(())
    }
}

pub fn train_mlp(ds: &NumericDataset, config: &MlpConfig) -> Result<MlpModel> {
    if ds.rows() == 0 {
        return Err(Error::EmptyInput);
    }
    if config.hidden == 0 || config.batch == 0 {
        return Err(Error::InvalidArgument("hidden size and batch size must be positive".into()));
    }
    if !(config.rate.is_finite() && config.rate > 0.0) {
        return Err(Error::InvalidArgument(format!("learning rate {} must be positive", config.rate)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut model = MlpModel::init(ds.dim(), ds.class_count(), config, &mut rng);
    model.class_names = ds.class_names.clone();
    let m = ds.rows();
    let mut order: Vec<usize> = (0..m).collect();
    let mut params = model.parameters();
    for epoch in 0..config.epochs {
        if config.batch < m {
            order.shuffle(&mut rng);
        }
        for chunk in order.chunks(config.batch) {
            let (loss, grad) = if chunk.len() == m && config.batch >= m {
                model.loss_and_gradient(&ds.x, &ds.labels)?
            } else {
                let x = ds.x.select_rows(chunk);
                let y: Vec<usize> = chunk.iter().map(|&i| ds.labels[i]).collect();
                model.loss_and_gradient(&x, &y)?
            };
            if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
                return Err(Error::NonFiniteLoss { epoch: epoch + 1 });
            }
            for (p, g) in params.iter_mut().zip(&grad) {
                *p -= config.rate * g;
            }
            if params.iter().any(|p| !p.is_finite()) {
                return Err(Error::NonFiniteLoss { epoch: epoch + 1 });
            }
            model.set_parameters(&params)?;
        }
    }
    Ok(model)
}

/// Argmax class ids (lowest index on ties) and softmax rows.
pub fn predict_mlp(model: &MlpModel, x: &DMatrix<f64>) -> Result<(Vec<usize>, DMatrix<f64>)> {
    model.check_input(x)?;
    let p = softmax_rows(&model.logits(x));
    let ids = p
        .row_iter()
        .map(|row| {
            let mut best = 0;
            for (c, &v) in row.iter().enumerate() {
                if v > row[best] {
                    best = c;
                }
            }
            best
        })
        .collect();
    Ok((ids, p))
}
