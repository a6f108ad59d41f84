use crate::error::{Error, Result};

/// Shannon entropy in bits of a class-count vector.
pub fn entropy(counts: &[usize]) -> Result<f64> {
    let total: usize = counts.iter().sum();
    if total == 0 {
        return Err(Error::InvalidArgument("entropy of an empty distribution".into()));
    }
    Ok(entropy_of(counts, total))
}

pub(crate) fn entropy_of(counts: &[usize], total: usize) -> f64 {
    let n = total as f64;
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitScore {
    pub gain: f64,
    pub split_info: f64,
    /// `gain / split_info`, or 0 when `split_info` is 0.
    pub ratio: f64,
}

/// Information gain, split information and gain ratio of partitioning
/// `parent` into `children` (per-class counts of each child).
pub fn split_score(parent: &[usize], children: &[Vec<usize>]) -> Result<SplitScore> {
    let mut sums = vec![0usize; parent.len()];
    for child in children {
        if child.len() != parent.len() {
            return Err(Error::InvalidArgument(
                "child class-count length differs from parent".into(),
            ));
        }
        for (s, c) in sums.iter_mut().zip(child) {
            *s += c;
        }
    }
    if sums != parent {
        return Err(Error::InvalidArgument(
            "children do not partition the parent counts".into(),
        ));
    }
    let total: usize = parent.iter().sum();
    if total == 0 {
        return Err(Error::InvalidArgument("empty parent".into()));
    }
    let sizes: Vec<usize> = children.iter().map(|c| c.iter().sum()).collect();
    Ok(score_counts(parent, children.iter().map(Vec::as_slice), &sizes, total))
}

pub(crate) fn score_counts<'a>(
    parent: &[usize],
    children: impl Iterator<Item = &'a [usize]>,
    sizes: &[usize],
    total: usize,
) -> SplitScore {
    let n = total as f64;
    let remainder: f64 = children
        .zip(sizes)
        .filter(|(_, &s)| s > 0)
        .map(|(c, &s)| s as f64 / n * entropy_of(c, s))
        .sum();
    let gain = entropy_of(parent, total) - remainder;
    let split_info = entropy_of(sizes, total);
    let ratio = if split_info > 0.0 { gain / split_info } else { 0.0 };
    SplitScore {
        gain,
        split_info,
        ratio,
    }
}

pub fn gain_ratio(parent: &[usize], children: &[Vec<usize>]) -> Result<f64> {
    Ok(split_score(parent, children)?.ratio)
}
