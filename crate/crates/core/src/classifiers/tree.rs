use nalgebra::DMatrix;

use crate::dataset::{ColumnKind, NumericDataset};
use crate::error::{Error, Result};

use super::info::score_counts;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeConfig {
    /// Minimum rows in each branch of a binary split; a one-hot group split
    /// needs at least two branches of this size.
    pub min_leaf: usize,
    pub max_depth: usize,
    pub min_gain: f64,
}

impl Default for TreeConfig {
    fn default() -> Self {
        TreeConfig {
            min_leaf: 2,
            max_depth: 30,
            min_gain: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Leaf {
        class: usize,
        distribution: Vec<usize>,
    },
    /// `x[feature] <= threshold` goes left.
    Threshold {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
        distribution: Vec<usize>,
    },
    /// Branch `k` takes rows whose one-hot column `start + k` is set; rows
    /// with no column set go to `fallback`.
    Group {
        start: usize,
        children: Vec<usize>,
        fallback: usize,
        distribution: Vec<usize>,
    },
}

impl Node {
    pub fn distribution(&self) -> &[usize] {
        match self {
            Node::Leaf { distribution, .. }
            | Node::Threshold { distribution, .. }
            | Node::Group { distribution, .. } => distribution,
        }
    }
}

/// Gain-ratio decision tree. `nodes[0]` is the root.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeModel {
    pub nodes: Vec<Node>,
    pub dim: usize,
    pub class_names: Vec<String>,
    pub config: TreeConfig,
}

impl TreeModel {
    pub fn class_count(&self) -> usize {
        self.class_names.len()
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match &nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Threshold { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
                Node::Group { children, .. } => {
                    1 + children.iter().map(|&c| walk(nodes, c)).max().unwrap_or(0)
                }
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }
}

fn majority(counts: &[usize]) -> usize {
    let mut best = 0;
    for (c, &n) in counts.iter().enumerate() {
        if n > counts[best] {
            best = c;
        }
    }
    best
}

enum Split {
    Threshold { feature: usize, threshold: f64 },
    Group { start: usize, len: usize },
}

struct Builder<'a> {
    x: &'a DMatrix<f64>,
    labels: &'a [usize],
    classes: usize,
    config: TreeConfig,
    /// (start, len, is_group) per feature group, in column order.
    blocks: Vec<(usize, usize, bool)>,
    nodes: Vec<Node>,
}

impl Builder<'_> {
    fn counts(&self, rows: &[usize]) -> Vec<usize> {
        let mut c = vec![0; self.classes];
        for &r in rows {
            c[self.labels[r]] += 1;
        }
        c
    }

    fn grow(&mut self, rows: Vec<usize>, depth: usize, parent_majority: usize) -> usize {
        let distribution = self.counts(&rows);
        let id = self.nodes.len();
        let class = if rows.is_empty() {
            parent_majority
        } else {
            majority(&distribution)
        };
        self.nodes.push(Node::Leaf {
            class,
            distribution: distribution.clone(),
        });
        let pure = distribution.iter().filter(|&&n| n > 0).count() <= 1;
        if pure || depth >= self.config.max_depth || rows.len() < 2 * self.config.min_leaf.max(1) {
            return id;
        }
        let Some(split) = self.best_split(&rows, &distribution) else {
            return id;
        };
        match split {
            Split::Threshold { feature, threshold } => {
                let (l, r): (Vec<usize>, Vec<usize>) =
                    rows.iter().partition(|&&i| self.x[(i, feature)] <= threshold);
                let left = self.grow(l, depth + 1, class);
                let right = self.grow(r, depth + 1, class);
                self.nodes[id] = Node::Threshold {
                    feature,
                    threshold,
                    left,
                    right,
                    distribution,
                };
            }
            Split::Group { start, len } => {
                let (parts, fallback) = self.group_partition(&rows, start, len);
                let children = parts
                    .into_iter()
                    .map(|p| self.grow(p, depth + 1, class))
                    .collect();
                self.nodes[id] = Node::Group {
                    start,
                    children,
                    fallback,
                    distribution,
                };
            }
        }
        id
    }

    fn group_partition(&self, rows: &[usize], start: usize, len: usize) -> (Vec<Vec<usize>>, usize) {
        let mut parts = vec![Vec::new(); len];
        let mut unset = Vec::new();
        for &r in rows {
            match group_branch(self.x, r, start, len) {
                Some(k) => parts[k].push(r),
                None => unset.push(r),
            }
        }
        let mut fallback = 0;
        for (k, p) in parts.iter().enumerate() {
            if p.len() > parts[fallback].len() {
                fallback = k;
            }
        }
        parts[fallback].extend(unset);
        parts[fallback].sort_unstable();
        (parts, fallback)
    }

    fn best_split(&self, rows: &[usize], parent: &[usize]) -> Option<Split> {
        let total = rows.len();
        let min_leaf = self.config.min_leaf.max(1);
        let mut best: Option<(f64, Split)> = None;
        let mut consider = |ratio: f64, split: Split| {
            if best.as_ref().is_none_or(|(b, _)| ratio > *b) {
                best = Some((ratio, split));
            }
        };
        let mut values: Vec<(f64, usize)> = Vec::with_capacity(total);
        for &(start, len, is_group) in &self.blocks {
            if is_group {
                let (parts, _) = self.group_partition(rows, start, len);
                let sizes: Vec<usize> = parts.iter().map(Vec::len).collect();
                if sizes.iter().filter(|&&s| s >= min_leaf).count() < 2 {
                    continue;
                }
                let counts: Vec<Vec<usize>> = parts.iter().map(|p| self.counts(p)).collect();
                let s = score_counts(parent, counts.iter().map(Vec::as_slice), &sizes, total);
                consider(s.ratio, Split::Group { start, len });
                continue;
            }
            for feature in start..start + len {
                values.clear();
                values.extend(rows.iter().map(|&r| (self.x[(r, feature)], self.labels[r])));
                values.sort_by(|a, b| a.0.total_cmp(&b.0));
                let mut left = vec![0usize; self.classes];
                let mut right = parent.to_vec();
                for k in 0..total - 1 {
                    let (v, c) = values[k];
                    left[c] += 1;
                    right[c] -= 1;
                    let next = values[k + 1].0;
                    let n_left = k + 1;
                    if v >= next || n_left < min_leaf || total - n_left < min_leaf {
                        continue;
                    }
                    let s = score_counts(
                        parent,
                        [left.as_slice(), right.as_slice()].into_iter(),
                        &[n_left, total - n_left],
                        total,
                    );
                    let mut threshold = v + (next - v) / 2.0;
                    if threshold >= next {
                        threshold = v;
                    }
                    consider(s.ratio, Split::Threshold { feature, threshold });
                }
            }
        }
        match best {
            Some((ratio, split)) if ratio >= self.config.min_gain => Some(split),
            _ => None,
        }
    }
}

fn group_branch(x: &DMatrix<f64>, row: usize, start: usize, len: usize) -> Option<usize> {
    (0..len).find(|&k| x[(row, start + k)] > 0.5)
}

pub fn train_tree(ds: &NumericDataset, config: &TreeConfig) -> Result<TreeModel> {
    if ds.rows() == 0 {
        return Err(Error::EmptyInput);
    }
    if !(config.min_gain.is_finite()) {
        return Err(Error::InvalidArgument("min_gain must be finite".into()));
    }
    let blocks = ds
        .groups
        .iter()
        .map(|g| (g.start, g.len, g.kind == ColumnKind::Discrete && g.len >= 2))
        .collect();
    let mut b = Builder {
        x: &ds.x,
        labels: &ds.labels,
        classes: ds.class_count(),
        config: *config,
        blocks,
        nodes: Vec::new(),
    };
    b.grow((0..ds.rows()).collect(), 0, 0);
    Ok(TreeModel {
        nodes: b.nodes,
        dim: ds.dim(),
        class_names: ds.class_names.clone(),
        config: *config,
    })
}

/// Predicted class ids and the training distribution of each reached leaf.
pub fn predict_tree(model: &TreeModel, x: &DMatrix<f64>) -> Result<(Vec<usize>, Vec<Vec<usize>>)> {
    if x.ncols() != model.dim {
        return Err(Error::DimensionMismatch {
            expected: model.dim,
            found: x.ncols(),
        });
    }
    let mut classes = Vec::with_capacity(x.nrows());
    let mut dists = Vec::with_capacity(x.nrows());
    for r in 0..x.nrows() {
        let mut i = 0;
        loop {
            match &model.nodes[i] {
                Node::Leaf { class, distribution } => {
                    classes.push(*class);
                    dists.push(distribution.clone());
                    break;
                }
                Node::Threshold {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => i = if x[(r, *feature)] <= *threshold { *left } else { *right },
                Node::Group {
                    start,
                    children,
                    fallback,
                    ..
                } => {
                    let k = group_branch(x, r, *start, children.len()).unwrap_or(*fallback);
                    i = children[k];
                }
            }
        }
    }
    Ok((classes, dists))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::FeatureGroup;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn accuracy(model: &TreeModel, ds: &NumericDataset) -> f64 {
        let (p, _) = predict_tree(model, &ds.x).unwrap();
        p.iter().zip(&ds.labels).filter(|(a, b)| a == b).count() as f64 / ds.rows() as f64
    }

    #[test]
    fn separable_line_gives_one_split() {
        let xs = [-3.0, -2.0, -1.5, -0.5, 0.5, 1.0, 2.0, 4.0];
        let rows: Vec<Vec<f64>> = xs.iter().map(|&v| vec![v]).collect();
        let labels: Vec<usize> = xs.iter().map(|&v| usize::from(v > 0.0)).collect();
        let ds = NumericDataset::from_rows(&rows, &labels, 2).unwrap();
        let t = train_tree(&ds, &TreeConfig::default()).unwrap();
        assert_eq!(t.depth(), 1);
        match &t.nodes[0] {
            Node::Threshold { threshold, .. } => assert_eq!(*threshold, 0.0),
            n => panic!("{n:?}"),
        }
        assert_eq!(accuracy(&t, &ds), 1.0);
    }

    #[test]
    fn consistent_data_fits_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let rows: Vec<Vec<f64>> = (0..120)
            .map(|_| (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        let labels: Vec<usize> = (0..120).map(|_| rng.gen_range(0..3)).collect();
        let ds = NumericDataset::from_rows(&rows, &labels, 3).unwrap();
        let config = TreeConfig {
            min_leaf: 1,
            max_depth: usize::MAX,
            min_gain: 0.0,
        };
        let t = train_tree(&ds, &config).unwrap();
        assert_eq!(accuracy(&t, &ds), 1.0);
        for n in &t.nodes {
            if let Node::Leaf { distribution, .. } = n {
                assert!(distribution.iter().filter(|&&c| c > 0).count() <= 1);
            }
        }
    }

    #[test]
    fn leaf_distributions_sum_to_routed_rows() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let rows: Vec<Vec<f64>> = (0..60)
            .map(|_| (0..2).map(|_| rng.gen_range(0.0..1.0)).collect())
            .collect();
        let labels: Vec<usize> = rows.iter().map(|r| usize::from(r[0] + r[1] > 1.0)).collect();
        let ds = NumericDataset::from_rows(&rows, &labels, 2).unwrap();
        let t = train_tree(&ds, &TreeConfig::default()).unwrap();
        let total: usize = t
            .nodes
            .iter()
            .filter(|n| matches!(n, Node::Leaf { .. }))
            .map(|n| n.distribution().iter().sum::<usize>())
            .sum();
        assert_eq!(total, 60);
        assert_eq!(t.nodes[0].distribution().iter().sum::<usize>(), 60);
        // determinism
        assert_eq!(t, train_tree(&ds, &TreeConfig::default()).unwrap());
    }

    #[test]
    fn single_leaf_predicts_constant() {
        let rows = vec![vec![1.0], vec![2.0], vec![3.0]];
        let ds = NumericDataset::from_rows(&rows, &[1, 1, 1], 2).unwrap();
        let t = train_tree(&ds, &TreeConfig::default()).unwrap();
        assert_eq!(t.nodes.len(), 1);
        let (p, d) = predict_tree(&t, &DMatrix::from_row_slice(2, 1, &[-5.0, 9.0])).unwrap();
        assert_eq!(p, vec![1, 1]);
        assert_eq!(d[0], vec![0, 3]);
        assert!(predict_tree(&t, &DMatrix::zeros(1, 2)).is_err());
    }

    #[test]
    fn majority_ties_go_to_lowest_class() {
        let rows = vec![vec![1.0], vec![1.0], vec![1.0], vec![1.0]];
        let ds = NumericDataset::from_rows(&rows, &[2, 1, 2, 1], 3).unwrap();
        let t = train_tree(&ds, &TreeConfig::default()).unwrap();
        assert_eq!(t.nodes[0], Node::Leaf { class: 1, distribution: vec![0, 2, 2] });
    }

    #[test]
    fn empty_dataset_is_an_error() {
        let ds = NumericDataset::from_rows(&[], &[], 2);
        if let Ok(ds) = ds {
            assert!(train_tree(&ds, &TreeConfig::default()).is_err());
        }
    }

    /// The 14-row play-tennis table: outlook (sunny, overcast, rain),
    /// temperature (hot, mild, cool), humidity (high, normal), windy (false, true).
    fn weather() -> NumericDataset {
        let table = [
            (0, 0, 0, 0, 0),
            (0, 0, 0, 1, 0),
            (1, 0, 0, 0, 1),
            (2, 1, 0, 0, 1),
            (2, 2, 1, 0, 1),
            (2, 2, 1, 1, 0),
            (1, 2, 1, 1, 1),
            (0, 1, 0, 0, 0),
            (0, 2, 1, 0, 1),
            (2, 1, 1, 0, 1),
            (0, 1, 1, 1, 1),
            (1, 1, 0, 1, 1),
            (1, 0, 1, 0, 1),
            (2, 1, 0, 1, 0),
        ];
        let widths = [("outlook", 3), ("temperature", 3), ("humidity", 2), ("windy", 2)];
        let d: usize = widths.iter().map(|w| w.1).sum();
        let mut x = DMatrix::zeros(14, d);
        let mut labels = Vec::new();
        for (i, &(o, t, h, w, play)) in table.iter().enumerate() {
            x[(i, o)] = 1.0;
            x[(i, 3 + t)] = 1.0;
            x[(i, 6 + h)] = 1.0;
            x[(i, 8 + w)] = 1.0;
            // class 0 = yes (9 rows), class 1 = no (5 rows)
            labels.push(1 - play);
        }
        let mut groups = Vec::new();
        let mut names = Vec::new();
        let mut start = 0;
        for (name, len) in widths {
            groups.push(FeatureGroup {
                name: name.into(),
                kind: ColumnKind::Discrete,
                start,
                len,
            });
            for k in 0..len {
                names.push(format!("{name}={k}"));
            }
            start += len;
        }
        NumericDataset::new(x, labels, vec!["yes".into(), "no".into()], groups, names).unwrap()
    }

    #[test]
    fn weather_root_split_is_outlook() {
        let ds = weather();
        assert_eq!(ds.class_sizes(), vec![9, 5]);
        // Hand ratios: outlook 0.156, humidity 0.152, windy 0.049, temperature 0.019.
        let t = train_tree(&ds, &TreeConfig::default()).unwrap();
        match &t.nodes[0] {
            Node::Group { start, children, .. } => {
                assert_eq!(*start, 0);
                assert_eq!(children.len(), 3);
            }
            n => panic!("{n:?}"),
        }
    }

    #[test]
    fn unseen_token_routes_to_majority_child() {
        let ds = weather();
        let t = train_tree(&ds, &TreeConfig::default()).unwrap();
        let Node::Group { children, fallback, .. } = &t.nodes[0] else {
            panic!()
        };
        // sunny and rain both have 5 rows; the lowest index wins.
        assert_eq!(*fallback, 0);
        let mut row = DMatrix::zeros(1, ds.dim());
        row[(0, 6)] = 1.0;
        row[(0, 8)] = 1.0;
        let (p, _) = predict_tree(&t, &row).unwrap();
        let mut sunny = row.clone();
        sunny[(0, 0)] = 1.0;
        assert_eq!(p, predict_tree(&t, &sunny).unwrap().0);
        assert_eq!(children.len(), 3);
    }
}
