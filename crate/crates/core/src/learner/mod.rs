//! Label-elimination learners and their building blocks.
//!
//! The active learners work top-down over dyadic partitions, keeping a set
//! of candidate labels per cell and refining only cells where at least two
//! candidates survive. [`nonadaptive`] implements the routine for a known
//! smoothness exponent; [`meta`] wraps it with a smoothness grid and
//! intersects the surviving candidate sets; [`passive`] is the i.i.d.
//! plug-in baseline.

pub mod meta;
pub mod nonadaptive;
pub mod passive;

pub use meta::{meta_aggregate, run_meta, MetaRun};
pub use nonadaptive::{run_nonadaptive, run_nonadaptive_seeded, LevelTrace, NonAdaptiveTrace};
pub use passive::{default_plugin_level, passive_plugin, run_passive};

use crate::dist::Dist;
use crate::dyadic::{cell_at, Cell};
use crate::labels::{Label, LabelSet};
use crate::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Hard cap on `2^(level*d)` for materialized per-cell tables.
pub(crate) const MAX_MAP_CELLS_LOG2: u32 = 24;

/// Rejection-sampling cap when drawing a point uniformly from
/// `cell ∩ support`; past this the cell is declared support-empty.
pub const MAX_REJECTIONS: u32 = 10_000;

/// Tracks a hard query budget. Every oracle query consumes exactly one unit;
/// `used` never exceeds `limit`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct BudgetMeter {
    limit: u64,
    used: u64,
}

impl BudgetMeter {
    pub fn new(limit: u64) -> Self {
        BudgetMeter { limit, used: 0 }
    }

    pub fn try_consume(&mut self, k: u64) -> Result<()> {
        if self.used + k > self.limit {
            return Err(Error::BudgetExhausted {
                used: self.used,
                limit: self.limit,
            });
        }
        self.used += k;
        Ok(())
    }

    pub fn used(&self) -> u64 {
        self.used
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn remaining(&self) -> u64 {
        self.limit - self.used
    }
}

/// A label oracle bound to one distribution, one budget, and one RNG stream.
pub struct QueryOracle<'a> {
    dist: &'a dyn Dist,
    pub meter: BudgetMeter,
    rng: ChaCha8Rng,
}

impl<'a> QueryOracle<'a> {
    pub fn new(dist: &'a dyn Dist, limit: u64, seed: u64) -> Self {
        QueryOracle {
            dist,
            meter: BudgetMeter::new(limit),
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn dist(&self) -> &dyn Dist {
        self.dist
    }

    /// One label query at `x`; consumes one budget unit.
    pub fn query_at(&mut self, x: &[f64]) -> Result<Label> {
        crate::dist::query(self.dist, x, &mut self.meter, &mut self.rng)
    }

    /// Draws `X` uniformly from `cell ∩ support` by rejection against the
    /// support test. `None` once [`MAX_REJECTIONS`] proposals all miss —
    /// the cell is then treated as support-empty. Does not consume budget.
    pub fn sample_in_cell(&mut self, cell: &Cell) -> Option<Vec<f64>> {
        let d = cell.dim();
        let r = cell.side();
        let mut x = vec![0.0; d];
        for _ in 0..MAX_REJECTIONS {
            for (i, xi) in x.iter_mut().enumerate() {
                let (lo, _) = cell.extent(i);
                *xi = lo + self.rng.random::<f64>() * r;
            }
            if self.dist.supported(&x) {
                return Some(x);
            }
        }
        None
    }

    /// Draws one i.i.d. pair `(X, Y)`; consumes one budget unit.
    pub fn draw_pair(&mut self) -> Result<(Vec<f64>, Label)> {
        let mut x = vec![0.0; self.dist.dim()];
        self.dist.sample_x_into(&mut self.rng, &mut x);
        let y = self.query_at(&x)?;
        Ok((x, y))
    }
}

/// Per-cell sample size at resolution `r` for smoothness `alpha`:
/// `ceil( 2 * ln(2L / (delta0 * r^(d+1))) / (lambda * r^alpha)^2 )`.
pub fn n_queries(r: f64, alpha: f64, lambda: f64, delta0: f64, l: usize, d: usize) -> Result<u64> {
    let v = n_queries_f(r, alpha, lambda, delta0, l, d)?;
    Ok(v as u64) // saturating; the budget guard trips long before this matters
}

/// Same as [`n_queries`] but as `f64`, for budget arithmetic that may run
/// far past integer range.
pub fn n_queries_f(
    r: f64,
    alpha: f64,
    lambda: f64,
    delta0: f64,
    l: usize,
    d: usize,
) -> Result<f64> {
    if r <= 0.0 || r > 1.0 {
        return Err(Error::domain(format!("resolution r = {r} out of (0,1]")));
    }
    if lambda <= 0.0 {
        return Err(Error::domain("lambda must be positive"));
    }
    if !(0.0 < delta0 && delta0 < 1.0) {
        return Err(Error::domain("delta0 must lie in (0,1)"));
    }
    if !(0.0 < alpha && alpha <= 1.0) {
        return Err(Error::domain("alpha must lie in (0,1]"));
    }
    if l < 2 {
        return Err(Error::domain("need at least two labels"));
    }
    let log_arg = 2.0 * l as f64 / (delta0 * r.powi(d as i32 + 1));
    let denom = lambda * r.powf(alpha);
    Ok((2.0 * log_arg.ln() / (denom * denom)).ceil())
}

/// Empirical per-cell regression estimate: component `y` is the fraction of
/// queried labels equal to `y`.
pub fn estimate_eta(labels: &[Label], l: usize) -> Result<Vec<f64>> {
    if labels.is_empty() {
        return Err(Error::domain("cannot estimate eta from an empty sample"));
    }
    let mut counts = vec![0u64; l];
    for &y in labels {
        counts[y as usize - 1] += 1;
    }
    Ok(counts
        .iter()
        .map(|&c| c as f64 / labels.len() as f64)
        .collect())
}

pub(crate) fn eta_hat_from_counts(counts: &[u32], total: u64) -> Vec<f64> {
    counts.iter().map(|&c| c as f64 / total as f64).collect()
}

/// Removes every candidate whose estimated gap to the top estimate reaches
/// `tau`. The gap is measured against the maximum over *all* labels; an
/// argmax of the estimate is never removed, and the best surviving candidate
/// is always kept, so a nonempty input yields a nonempty output.
pub fn eliminate(candidates: LabelSet, eta_hat: &[f64], tau: f64) -> LabelSet {
    debug_assert!(tau > 0.0);
    let top = eta_hat.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut out = LabelSet::empty();
    for y in candidates.iter() {
        if top - eta_hat[y as usize - 1] < tau {
            out.insert(y);
        }
    }
    if out.is_empty() {
        // the global argmax was eliminated at a coarser level; keep the best
        // remaining candidates rather than emptying the set
        let best = candidates
            .iter()
            .map(|y| eta_hat[y as usize - 1])
            .fold(f64::NEG_INFINITY, f64::max);
        for y in candidates.iter() {
            if eta_hat[y as usize - 1] == best {
                out.insert(y);
            }
        }
    }
    out
}

/// Likelihood-ratio labeling of one cell from binary outcomes (`1` meaning
/// "label 1 was observed"), with per-outcome bias `q`: picks the sign whose
/// product likelihood `prod_i (1/2 + sign*(2 y_i - 1) q)` is larger, ties and
/// empty samples going to 1. Since the log-likelihood difference is
/// `(2k - m) * (ln(1/2+q) - ln(1/2-q))`, this reduces exactly to majority
/// vote on the outcomes.
pub fn np_label(outcomes: &[u8], q: f64) -> Result<u8> {
    if !(0.0 < q && q < 0.5) {
        return Err(Error::domain("q must lie in (0, 1/2)"));
    }
    let m = outcomes.len() as i64;
    let ones: i64 = outcomes.iter().map(|&y| y as i64).sum();
    Ok(if 2 * ones >= m { 1 } else { 0 })
}

/// Majority vote over binary outcomes, tie to 1 — for comparisons against
/// [`np_label`].
pub fn majority_label(outcomes: &[u8]) -> u8 {
    let m = outcomes.len() as i64;
    let ones: i64 = outcomes.iter().map(|&y| y as i64).sum();
    if 2 * ones >= m {
        1
    } else {
        0
    }
}

/// Per-cell candidate-label sets over a full dyadic partition; doubles as
/// the final classifier via the reading `h(x) = min L_{cell(x)}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CandidateLabelMap {
    level: u32,
    dim: usize,
    labels: usize,
    sets: Vec<LabelSet>,
}

impl CandidateLabelMap {
    pub fn new(level: u32, dim: usize, labels: usize, sets: Vec<LabelSet>) -> Self {
        assert!((level as usize * dim) < usize::BITS as usize);
        assert_eq!(sets.len(), 1usize << (level as usize * dim));
        CandidateLabelMap {
            level,
            dim,
            labels,
            sets,
        }
    }

    /// All cells carry the full label set.
    pub fn full(level: u32, dim: usize, labels: usize) -> Self {
        Self::constant(level, dim, LabelSet::full(labels), labels)
    }

    pub fn constant(level: u32, dim: usize, set: LabelSet, labels: usize) -> Self {
        let n = 1usize << (level as usize * dim);
        CandidateLabelMap {
            level,
            dim,
            labels,
            sets: vec![set; n],
        }
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn label_count(&self) -> usize {
        self.labels
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn index_of(&self, cell: &Cell) -> usize {
        debug_assert_eq!(cell.level(), self.level);
        let side = 1usize << self.level;
        cell.coords()
            .iter()
            .fold(0usize, |acc, &c| acc * side + c as usize)
    }

    pub fn set_at(&self, index: usize) -> LabelSet {
        self.sets[index]
    }

    pub fn set_of(&self, cell: &Cell) -> LabelSet {
        self.sets[self.index_of(cell)]
    }

    pub fn set_set(&mut self, index: usize, set: LabelSet) {
        self.sets[index] = set;
    }

    pub fn sets(&self) -> &[LabelSet] {
        &self.sets
    }

    /// Classifier reading: the smallest candidate label of the cell at `x`.
    pub fn classify(&self, x: &[f64]) -> Result<Label> {
        let cell = cell_at(x, self.level)?;
        Ok(self.set_of(&cell).min_label().unwrap_or(1))
    }

    /// Writes `cell,label-set bitmask` CSV rows.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "cell,labels_mask")?;
        let part = crate::dyadic::DyadicPartition::new(self.level, self.dim)
            .expect("level validated at construction");
        for (i, cell) in part.cells().enumerate() {
            writeln!(w, "{cell},{}", self.sets[i].bits())?;
        }
        Ok(())
    }

    /// Candidate sets never grow: every set of `self` contains the matching
    /// set of `other` cellwise. Used by monotonicity checks.
    pub fn contains_cellwise(&self, other: &CandidateLabelMap) -> bool {
        self.sets
            .iter()
            .zip(&other.sets)
            .all(|(a, b)| b.is_subset_of(*a))
    }
}

/// Fills every level-`level` descendant of `cell` in `sets` with `set`.
pub(crate) fn fill_descendants(
    sets: &mut [LabelSet],
    cell: &Cell,
    set: LabelSet,
    level: u32,
    dim: usize,
) {
    debug_assert!(cell.level() <= level);
    let shift = level - cell.level();
    let per_axis = 1u64 << shift;
    let side = 1usize << level;
    let mut offs = vec![0u64; dim];
    loop {
        let mut idx = 0usize;
        for (i, &c) in cell.coords().iter().enumerate() {
            idx = idx * side + ((c << shift) + offs[i]) as usize;
        }
        sets[idx] = set;
        let mut i = dim;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            offs[i] += 1;
            if offs[i] < per_axis {
                break;
            }
            offs[i] = 0;
        }
    }
}

/// Deterministic seed for a run component, derived from the master seed.
pub fn stream_seed(master: u64, parts: &[u64]) -> u64 {
    crate::util::derive_seed(master, parts)
}
