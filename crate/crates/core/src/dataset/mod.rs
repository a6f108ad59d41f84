//! Ingestion: parsing connection records, label mapping, encoding and
//! stratified subsampling.

mod encoder;
mod labels;
mod sample;
mod schema;

pub use encoder::{ColumnEncoding, Encoder};
pub use labels::{map_labels, Category, LabelAssignment, LabelMap, UnknownPolicy};
pub use sample::{allocate, stratified_sample};
pub use schema::{
    parse_kdd_csv, read_kdd_file, Column, ColumnKind, ColumnValues, ParseOptions, RawDataset,
    Schema,
};

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// An original feature and the contiguous block of encoded columns it owns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureGroup {
    pub name: String,
    pub kind: ColumnKind,
    pub start: usize,
    pub len: usize,
}

impl FeatureGroup {
    pub fn columns(&self) -> std::ops::Range<usize> {
        self.start..self.start + self.len
    }
}

/// Encoded samples: `x` is M × d, `labels[i]` in `0..class_names.len()`.
#[derive(Debug, Clone, PartialEq)]
pub struct NumericDataset {
    pub x: DMatrix<f64>,
    pub labels: Vec<usize>,
    pub class_names: Vec<String>,
    pub groups: Vec<FeatureGroup>,
    /// One name per encoded column, e.g. `src_bytes` or `service=http`.
    pub column_names: Vec<String>,
}

impl NumericDataset {
    pub fn new(
        x: DMatrix<f64>,
        labels: Vec<usize>,
        class_names: Vec<String>,
        groups: Vec<FeatureGroup>,
        column_names: Vec<String>,
    ) -> Result<NumericDataset> {
        if labels.len() != x.nrows() {
            return Err(Error::DimensionMismatch {
                expected: x.nrows(),
                found: labels.len(),
            });
        }
        if column_names.len() != x.ncols() {
            return Err(Error::DimensionMismatch {
                expected: x.ncols(),
                found: column_names.len(),
            });
        }
        let mut next = 0;
        for g in &groups {
            if g.start != next || g.len == 0 {
                return Err(Error::InvalidArgument(format!(
                    "feature group `{}` is not contiguous",
                    g.name
                )));
            }
            next += g.len;
        }
        if next != x.ncols() {
            return Err(Error::DimensionMismatch {
                expected: x.ncols(),
                found: next,
            });
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= class_names.len()) {
            return Err(Error::InvalidArgument(format!(
                "label {bad} out of range for {} classes",
                class_names.len()
            )));
        }
        Ok(NumericDataset {
            x,
            labels,
            class_names,
            groups,
            column_names,
        })
    }

    /// Dataset whose columns are all independent continuous features.
    pub fn from_continuous(
        x: DMatrix<f64>,
        labels: Vec<usize>,
        class_names: Vec<String>,
        names: Vec<String>,
    ) -> Result<NumericDataset> {
        let groups = names
            .iter()
            .enumerate()
            .map(|(i, n)| FeatureGroup {
                name: n.clone(),
                kind: ColumnKind::Continuous,
                start: i,
                len: 1,
            })
            .collect();
        NumericDataset::new(x, labels, class_names, groups, names)
    }

    /// Convenience constructor: rows as slices, features named `f1..fd`,
    /// classes named `c0..c{C-1}`.
    pub fn from_rows(rows: &[Vec<f64>], labels: &[usize], class_count: usize) -> Result<NumericDataset> {
        let d = rows.first().map(|r| r.len()).unwrap_or(0);
        if let Some(r) = rows.iter().find(|r| r.len() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: r.len(),
            });
        }
        let x = DMatrix::from_fn(rows.len(), d, |i, j| rows[i][j]);
        NumericDataset::from_continuous(
            x,
            labels.to_vec(),
            (0..class_count).map(|c| format!("c{c}")).collect(),
            (1..=d).map(|j| format!("f{j}")).collect(),
        )
    }

    pub fn rows(&self) -> usize {
        self.x.nrows()
    }

    pub fn dim(&self) -> usize {
        self.x.ncols()
    }

    pub fn class_count(&self) -> usize {
        self.class_names.len()
    }

    pub fn class_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.class_count()];
        for &l in &self.labels {
            sizes[l] += 1;
        }
        sizes
    }

    /// Index of the feature group owning encoded column `col`.
    pub fn group_of(&self, col: usize) -> usize {
        self.groups
            .iter()
            .position(|g| g.columns().contains(&col))
            .expect("column within dataset")
    }

    /// Rows in the given order (duplicates allowed).
    pub fn select_rows(&self, indices: &[usize]) -> NumericDataset {
        let x = self.x.select_rows(indices);
        let labels = indices.iter().map(|&i| self.labels[i]).collect();
        NumericDataset {
            x,
            labels,
            class_names: self.class_names.clone(),
            groups: self.groups.clone(),
            column_names: self.column_names.clone(),
        }
    }

    /// Keeps the named original features (case-insensitive); a discrete
    /// feature keeps its whole one-hot block. Column order is preserved.
    pub fn select_features<S: AsRef<str>>(&self, names: &[S]) -> Result<NumericDataset> {
        let mut keep = vec![false; self.groups.len()];
        for name in names {
            let name = name.as_ref().trim();
            let idx = self
                .groups
                .iter()
                .position(|g| g.name.eq_ignore_ascii_case(name))
                .ok_or_else(|| Error::UnknownFeature(name.to_string()))?;
            keep[idx] = true;
        }
        let idx: Vec<usize> = keep
            .iter()
            .enumerate()
            .filter_map(|(i, &k)| k.then_some(i))
            .collect();
        self.select_feature_indices(&idx)
    }

    /// Keeps original features by group index.
    pub fn select_feature_indices(&self, indices: &[usize]) -> Result<NumericDataset> {
        let mut wanted: Vec<usize> = indices.to_vec();
        wanted.sort_unstable();
        wanted.dedup();
        let mut cols = Vec::new();
        let mut groups = Vec::new();
        for &gi in &wanted {
            let g = self
                .groups
                .get(gi)
                .ok_or_else(|| Error::UnknownFeature(format!("#{gi}")))?;
            groups.push(FeatureGroup {
                name: g.name.clone(),
                kind: g.kind,
                start: cols.len(),
                len: g.len,
            });
            cols.extend(g.columns());
        }
        if cols.is_empty() {
            return Err(Error::InvalidArgument("no features selected".into()));
        }
        NumericDataset::new(
            self.x.select_columns(&cols),
            self.labels.clone(),
            self.class_names.clone(),
            groups,
            cols.iter().map(|&c| self.column_names[c].clone()).collect(),
        )
    }

    /// Rows grouped by class (stable within a class) and the permutation used:
    /// `perm[k]` is the original index of the k-th grouped row.
    pub fn grouped_by_class(&self) -> (NumericDataset, Vec<usize>) {
        let mut perm: Vec<usize> = (0..self.rows()).collect();
        perm.sort_by_key(|&i| self.labels[i]);
        (self.select_rows(&perm), perm)
    }
}
