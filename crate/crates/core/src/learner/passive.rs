//! Passive plug-in baseline: partition the cube at a fixed level and label
//! each cell by the majority vote of the i.i.d. sample points that fall in
//! it (ties to the smaller label, empty cells default to label 1).

use super::{CandidateLabelMap, QueryOracle, MAX_MAP_CELLS_LOG2};
use crate::dist::Dist;
use crate::dyadic::DyadicPartition;
use crate::labels::{Label, LabelSet};
use crate::{Error, Result};

/// Majority-vote histogram classifier from an i.i.d. sample.
pub fn passive_plugin(
    sample: &[(Vec<f64>, Label)],
    level: u32,
    dim: usize,
    labels: usize,
) -> Result<CandidateLabelMap> {
    if sample.is_empty() {
        return Err(Error::domain("plug-in needs a nonempty sample"));
    }
    if level as usize * dim > MAX_MAP_CELLS_LOG2 as usize {
        return Err(Error::domain("plug-in level too fine to materialize"));
    }
    let part = DyadicPartition::new(level, dim)?;
    let mut counts = vec![0u32; part.len() * labels];
    for (x, y) in sample {
        let idx = part.index_at(x)?;
        counts[idx * labels + (*y as usize - 1)] += 1;
    }
    let sets = (0..part.len())
        .map(|idx| {
            let row = &counts[idx * labels..(idx + 1) * labels];
            let mut best = 0usize;
            for (i, &c) in row.iter().enumerate() {
                if c > row[best] {
                    best = i;
                }
            }
            // empty cells land on label 1 via best = 0
            LabelSet::singleton(best as Label + 1)
        })
        .collect();
    Ok(CandidateLabelMap::new(level, dim, labels, sets))
}

/// Default partition level for a sample of size `n`:
/// `round(log2(n) / (2*alpha + d))`.
pub fn default_plugin_level(n: u64, alpha: f64, dim: usize) -> u32 {
    let k = ((n.max(1) as f64).log2() / (2.0 * alpha + dim as f64)).round() as i64;
    k.clamp(0, (MAX_MAP_CELLS_LOG2 as usize / dim) as i64) as u32
}

/// Draws `n` i.i.d. pairs and fits the plug-in at `level` (or the default).
pub fn run_passive(
    dist: &dyn Dist,
    n: u64,
    level: Option<u32>,
    alpha: f64,
    seed: u64,
) -> Result<(CandidateLabelMap, u64)> {
    let mut oracle = QueryOracle::new(dist, n, seed);
    let mut sample = Vec::with_capacity(n as usize);
    for _ in 0..n {
        sample.push(oracle.draw_pair()?);
    }
    let k = level.unwrap_or_else(|| default_plugin_level(n, alpha, dist.dim()));
    let map = passive_plugin(&sample, k, dist.dim(), dist.label_count())?;
    Ok((map, oracle.meter.used()))
}
