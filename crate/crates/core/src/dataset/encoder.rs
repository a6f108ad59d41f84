use std::collections::HashMap;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

use super::labels::LabelAssignment;
use super::schema::{ColumnKind, ColumnValues, RawDataset};
use super::{FeatureGroup, NumericDataset};

#[derive(Debug, Clone, PartialEq)]
pub enum ColumnEncoding {
    /// Standardized to `(x - mean) / std`; `std == 0` means the column encodes to 0.
    Continuous { name: String, mean: f64, std: f64 },
    /// One-hot over a vocabulary frozen at fit time, in first-occurrence order.
    Discrete { name: String, vocabulary: Vec<String> },
}

impl ColumnEncoding {
    pub fn name(&self) -> &str {
        match self {
            ColumnEncoding::Continuous { name, .. } | ColumnEncoding::Discrete { name, .. } => name,
        }
    }

    fn width(&self) -> usize {
        match self {
            ColumnEncoding::Continuous { .. } => 1,
            ColumnEncoding::Discrete { vocabulary, .. } => vocabulary.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Encoder {
    pub columns: Vec<ColumnEncoding>,
}

impl Encoder {
    /// Learns vocabularies and population mean/std from `ds`.
    pub fn fit(ds: &RawDataset) -> Result<Encoder> {
        if ds.rows() == 0 {
            return Err(Error::EmptyInput);
        }
        let columns = ds
            .schema
            .columns()
            .iter()
            .zip(&ds.columns)
            .map(|(col, values)| match values {
                ColumnValues::Continuous(v) => {
                    let n = v.len() as f64;
                    let mean = v.iter().sum::<f64>() / n;
                    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
                    let mut std = var.sqrt();
                    if std <= f64::EPSILON * mean.abs().max(1.0) {
                        std = 0.0;
                    }
                    ColumnEncoding::Continuous {
                        name: col.name.clone(),
                        mean,
                        std,
                    }
                }
                ColumnValues::Discrete { tokens, .. } => ColumnEncoding::Discrete {
                    name: col.name.clone(),
                    vocabulary: tokens.clone(),
                },
            })
            .collect();
        Ok(Encoder { columns })
    }

    /// Indices of continuous columns that had zero variance at fit time.
    pub fn zero_variance(&self) -> Vec<usize> {
        self.columns
            .iter()
            .enumerate()
            .filter_map(|(i, c)| match c {
                ColumnEncoding::Continuous { std, .. } if *std == 0.0 => Some(i),
                _ => None,
            })
            .collect()
    }

    pub fn width(&self) -> usize {
        self.columns.iter().map(ColumnEncoding::width).sum()
    }

    pub fn encode(&self, ds: &RawDataset, labels: &LabelAssignment) -> Result<NumericDataset> {
        self.encode_with(ds, labels.ids.clone(), labels.class_names())
    }

    pub fn encode_with(
        &self,
        ds: &RawDataset,
        labels: Vec<usize>,
        class_names: Vec<String>,
    ) -> Result<NumericDataset> {
        if ds.schema.len() != self.columns.len() {
            return Err(Error::DimensionMismatch {
                expected: self.columns.len(),
                found: ds.schema.len(),
            });
        }
        for (col, enc) in ds.schema.columns().iter().zip(&self.columns) {
            let kind_ok = matches!(
                (col.kind, enc),
                (ColumnKind::Continuous, ColumnEncoding::Continuous { .. })
                    | (ColumnKind::Discrete, ColumnEncoding::Discrete { .. })
            );
            if col.name != enc.name() || !kind_ok {
                return Err(Error::InvalidArgument(format!(
                    "column `{}` does not match encoder column `{}`",
                    col.name,
                    enc.name()
                )));
            }
        }

        let rows = ds.rows();
        let mut x = DMatrix::zeros(rows, self.width());
        let mut groups = Vec::with_capacity(self.columns.len());
        let mut column_names = Vec::with_capacity(self.width());
        let mut start = 0;
        for (enc, values) in self.columns.iter().zip(&ds.columns) {
            match (enc, values) {
                (ColumnEncoding::Continuous { name, mean, std }, ColumnValues::Continuous(v)) => {
                    if *std > 0.0 {
                        for (r, &val) in v.iter().enumerate() {
                            x[(r, start)] = (val - mean) / std;
                        }
                    }
                    column_names.push(name.clone());
                    groups.push(FeatureGroup {
                        name: name.clone(),
                        kind: ColumnKind::Continuous,
                        start,
                        len: 1,
                    });
                }
                (
                    ColumnEncoding::Discrete { name, vocabulary },
                    ColumnValues::Discrete { tokens, codes },
                ) => {
                    let position: HashMap<&str, usize> = vocabulary
                        .iter()
                        .enumerate()
                        .map(|(i, t)| (t.as_str(), i))
                        .collect();
                    // Unseen tokens map to None and leave an all-zero block.
                    let slot: Vec<Option<usize>> = tokens
                        .iter()
                        .map(|t| position.get(t.as_str()).copied())
                        .collect();
                    for (r, &code) in codes.iter().enumerate() {
                        if let Some(k) = slot[code as usize] {
                            x[(r, start + k)] = 1.0;
                        }
                    }
                    column_names.extend(vocabulary.iter().map(|t| format!("{name}={t}")));
                    groups.push(FeatureGroup {
                        name: name.clone(),
                        kind: ColumnKind::Discrete,
                        start,
                        len: vocabulary.len(),
                    });
                }
                _ => unreachable!("kinds checked above"),
            }
            start += enc.width();
        }
        NumericDataset::new(x, labels, class_names, groups, column_names)
    }
}
