use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

use super::NumericDataset;

/// Per-class sample counts for a budget.
///
/// Each class gets at least `min(min_per_class, size)`. Classes whose
/// proportional quota falls below that floor are pinned to it; the rest of
/// the budget is split proportionally among the remaining classes with
/// largest-remainder rounding (ties to the lowest class id). The result
/// sums to `budget` whenever `budget < Σ sizes`.
pub fn allocate(sizes: &[usize], budget: usize, min_per_class: usize) -> Result<Vec<usize>> {
    if budget == 0 || min_per_class == 0 {
        return Err(Error::InvalidArgument(
            "budget and min_per_class must be positive".into(),
        ));
    }
    if budget < sizes.len() * min_per_class {
        return Err(Error::InvalidArgument(format!(
            "budget {budget} is smaller than {} classes x {min_per_class} minimum",
            sizes.len()
        )));
    }
    let total: usize = sizes.iter().sum();
    if budget >= total {
        return Ok(sizes.to_vec());
    }
    let floors: Vec<usize> = sizes.iter().map(|&s| s.min(min_per_class)).collect();
    let mut pinned = vec![false; sizes.len()];
    let (rest_budget, rest_mass) = loop {
        let rest_budget = budget
            - (0..sizes.len())
                .filter(|&c| pinned[c])
                .map(|c| floors[c])
                .sum::<usize>();
        let rest_mass: usize = (0..sizes.len()).filter(|&c| !pinned[c]).map(|c| sizes[c]).sum();
        let mut changed = false;
        for c in 0..sizes.len() {
            // quota < floor  <=>  rest_budget * size < floor * rest_mass
            if !pinned[c]
                && (rest_budget as u128) * (sizes[c] as u128)
                    < (floors[c] as u128) * (rest_mass as u128)
            {
                pinned[c] = true;
                changed = true;
            }
        }
        if !changed {
            break (rest_budget as u128, rest_mass as u128);
        }
    };

    let mut alloc = floors.clone();
    let mut remainders = Vec::new();
    let mut assigned = 0u128;
    for c in 0..sizes.len() {
        if pinned[c] {
            continue;
        }
        let scaled = rest_budget * sizes[c] as u128;
        alloc[c] = (scaled / rest_mass) as usize;
        assigned += alloc[c] as u128;
        remainders.push((scaled % rest_mass, c));
    }
    let leftover = (rest_budget - assigned) as usize;
    remainders.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    for &(_, c) in remainders.iter().take(leftover) {
        alloc[c] += 1;
    }
    Ok(alloc)
}

/// Class-proportional subsample with per-class floors. Rows keep their
/// original relative order; the draw is fully determined by `seed`.
pub fn stratified_sample(
    ds: &NumericDataset,
    budget: usize,
    min_per_class: usize,
    seed: u64,
) -> Result<NumericDataset> {
    let sizes = ds.class_sizes();
    let alloc = allocate(&sizes, budget, min_per_class)?;
    if alloc == sizes {
        return Ok(ds.clone());
    }
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); sizes.len()];
    for (i, &l) in ds.labels.iter().enumerate() {
        members[l].push(i);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = Vec::with_capacity(alloc.iter().sum());
    for (class, rows) in members.iter().enumerate() {
        if alloc[class] == rows.len() {
            picked.extend_from_slice(rows);
        } else {
            picked.extend(
                index::sample(&mut rng, rows.len(), alloc[class])
                    .into_iter()
                    .map(|k| rows[k]),
            );
        }
    }
    picked.sort_unstable();
    Ok(ds.select_rows(&picked))
}
