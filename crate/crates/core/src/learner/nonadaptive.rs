//! The non-adaptive label-elimination routine for a known smoothness
//! exponent.
//!
//! Starting from the two-cell-per-axis partition, the routine samples
//! `n_{r,alpha}` labels uniformly in each active cell, eliminates candidate
//! labels whose estimated gap to the top estimate reaches `6*lambda*r^alpha`,
//! and keeps active only the children of cells where at least two candidates
//! survive. The budget for a level is charged in full before the level runs,
//! so the loop guard alone keeps total usage at or below the budget.

use super::{
    eliminate, eta_hat_from_counts, fill_descendants, n_queries, n_queries_f, CandidateLabelMap,
    QueryOracle, MAX_MAP_CELLS_LOG2,
};
use crate::dyadic::{Cell, DyadicPartition};
use crate::labels::LabelSet;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Per-cell outcome at one level: query counts per label and the surviving
/// candidate set. Kept in the trace so tests can audit estimate deviations.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CellRecord {
    pub cell: Cell,
    pub counts: Vec<u32>,
    pub set_after: LabelSet,
}

/// What happened at one level of the refinement.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LevelTrace {
    pub level: u32,
    /// Cells active when the level started.
    pub active_cells: usize,
    /// Labels actually drawn at this level.
    pub queries: u64,
    /// Per-cell sample size `n_{r,alpha}` charged for this level.
    pub per_cell_queries: u64,
    /// Active cells found to carry no support.
    pub support_empty: usize,
    pub cells: Vec<CellRecord>,
}

/// Full record of one run: per-level activity, the finest level reached,
/// and the final candidate map at the output resolution.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NonAdaptiveTrace {
    pub levels: Vec<LevelTrace>,
    /// `r_min = 2^-r_min_level`, the finest level whose sampling completed.
    pub r_min_level: u32,
    pub queries_used: u64,
    pub map: CandidateLabelMap,
}

impl NonAdaptiveTrace {
    pub fn r_min(&self) -> f64 {
        0.5f64.powi(self.r_min_level as i32)
    }
}

/// Runs the routine against `oracle` with per-run budget `n0` (the oracle's
/// own meter may be shared and larger). `r0_level` is the output resolution;
/// refinement never proceeds past it.
pub fn run_nonadaptive(
    oracle: &mut QueryOracle<'_>,
    n0: f64,
    delta0: f64,
    alpha: f64,
    lambda: f64,
    r0_level: u32,
) -> Result<NonAdaptiveTrace> {
    if n0 < 1.0 {
        return Err(Error::domain("budget n0 must be at least 1"));
    }
    let d = oracle.dist().dim();
    let l = oracle.dist().label_count();
    if r0_level as usize * d > MAX_MAP_CELLS_LOG2 as usize {
        return Err(Error::domain(format!(
            "output level {r0_level} too fine to materialize in {d} dimensions"
        )));
    }
    let start_used = oracle.meter.used();
    let full = LabelSet::full(l);

    // Active cells at the current level, each carrying its candidate set.
    let mut active: Vec<(Cell, LabelSet)> = DyadicPartition::new(1, d)?
        .cells()
        .map(|c| (c, full))
        .collect();
    // Cells whose candidate set is final; the set covers their whole subtree.
    let mut settled: Vec<(Cell, LabelSet)> = Vec::new();
    let mut levels: Vec<LevelTrace> = Vec::new();

    let mut k = 1u32;
    // Budget charged through the current level, before it runs.
    let mut charged = active.len() as f64 * n_queries_f(0.5, alpha, lambda, delta0, l, d)?;

    while charged <= n0 && !active.is_empty() && k <= r0_level {
        let r = 0.5f64.powi(k as i32);
        let nq = n_queries(r, alpha, lambda, delta0, l, d)?;
        let tau = 6.0 * lambda * r.powf(alpha);
        let mut trace = LevelTrace {
            level: k,
            active_cells: active.len(),
            queries: 0,
            per_cell_queries: nq,
            support_empty: 0,
            cells: Vec::with_capacity(active.len()),
        };
        let mut next: Vec<(Cell, LabelSet)> = Vec::new();
        for (cell, set) in active.drain(..) {
            let mut counts = vec![0u32; l];
            let mut drawn = 0u64;
            for _ in 0..nq {
                match oracle.sample_in_cell(&cell) {
                    Some(x) => {
                        let y = oracle.query_at(&x)?;
                        counts[y as usize - 1] += 1;
                        drawn += 1;
                    }
                    None => break,
                }
            }
            if drawn == 0 {
                // no support here: drop from the active set, keep the
                // inherited labels (the cell carries no mass anyway)
                trace.support_empty += 1;
                settled.push((cell, set));
                continue;
            }
            trace.queries += drawn;
            let eta_hat = eta_hat_from_counts(&counts, drawn);
            let new_set = eliminate(set, &eta_hat, tau);
            trace.cells.push(CellRecord {
                cell: cell.clone(),
                counts,
                set_after: new_set,
            });
            if new_set.len() >= 2 {
                for child in cell.refine() {
                    next.push((child, new_set));
                }
            } else {
                settled.push((cell, new_set));
            }
        }
        levels.push(trace);
        k += 1;
        if !next.is_empty() {
            charged += next.len() as f64
                * n_queries_f(0.5f64.powi(k as i32), alpha, lambda, delta0, l, d)?;
        }
        active = next;
    }

    let r_min_level = k - 1;
    // Leftover active cells inherited their parent's set verbatim; settle the
    // parents once instead (children of one parent are contiguous).
    let children_per_parent = 1usize << d;
    for chunk in active.chunks(children_per_parent) {
        let parent = chunk[0].0.parent().expect("active cells sit below level 0");
        settled.push((parent, chunk[0].1));
    }

    // Materialize the candidate map at the output resolution.
    let part = DyadicPartition::new(r0_level, d)?;
    let mut sets = vec![full; part.len()];
    for (cell, set) in &settled {
        fill_descendants(&mut sets, cell, *set, r0_level, d);
    }
    let map = CandidateLabelMap::new(r0_level, d, l, sets);

    Ok(NonAdaptiveTrace {
        levels,
        r_min_level,
        queries_used: oracle.meter.used() - start_used,
        map,
    })
}

/// Convenience wrapper: fresh oracle with budget exactly `n0`, output level
/// chosen like the adaptive caller would (`r0 = 2^floor(log2(n0^(-1/d)))`),
/// unless pinned.
pub fn run_nonadaptive_seeded(
    dist: &dyn crate::dist::Dist,
    n0: u64,
    delta0: f64,
    alpha: f64,
    lambda: f64,
    r0_level: Option<u32>,
    seed: u64,
) -> Result<NonAdaptiveTrace> {
    let d = dist.dim();
    let r0 = r0_level.unwrap_or_else(|| auto_output_level(n0 as f64, d));
    let mut oracle = QueryOracle::new(dist, n0, seed);
    run_nonadaptive(&mut oracle, n0 as f64, delta0, alpha, lambda, r0)
}

/// `r0 = 2^floor(log2(n0^(-1/d)))`, clamped to the materialization cap.
pub fn auto_output_level(n0: f64, d: usize) -> u32 {
    let e = (-(n0.max(1.0).powf(-1.0 / d as f64).log2().floor())) as i64;
    e.clamp(0, (MAX_MAP_CELLS_LOG2 as usize / d) as i64) as u32
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::{PiecewiseConst1d, UniformConst};
    use crate::learner::stream_seed;

    #[test]
    fn auto_level_matches_formula() {
        // n0 = 49.2 in one dimension -> level 6
        assert_eq!(auto_output_level(49.2, 1), 6);
        assert_eq!(auto_output_level(64.0, 1), 6);
        assert_eq!(auto_output_level(0.5, 1), 0);
        assert_eq!(auto_output_level(1000.0, 2), 5);
    }

    #[test]
    fn easy_spec_settles_on_the_bayes_label() {
        // strong signal, generous budget: every output cell keeps only label 1
        let dist = UniformConst::new(1, vec![0.95, 0.05], "sure".into()).unwrap();
        let mut clean = 0;
        for seed in 0..100u64 {
            let trace = run_nonadaptive_seeded(
                &dist,
                10_000,
                0.05,
                1.0,
                0.2,
                Some(4),
                stream_seed(9, &[seed]),
            )
            .unwrap();
            assert!(trace.queries_used <= 10_000);
            if trace
                .map
                .sets()
                .iter()
                .all(|s| *s == LabelSet::singleton(1))
            {
                clean += 1;
            }
        }
        // mis-elimination odds are far below delta0; all runs should be clean
        assert!(clean >= 95, "only {clean}/100 runs settled on label 1");
    }

    #[test]
    fn flat_spec_keeps_both_labels_until_budget() {
        let dist = UniformConst::new(1, vec![0.5, 0.5], "flat".into()).unwrap();
        for seed in 0..20u64 {
            let trace =
                run_nonadaptive_seeded(&dist, 3_000, 0.05, 1.0, 0.2, Some(8), stream_seed(11, &[seed]))
                    .unwrap();
            assert!(trace
                .map
                .sets()
                .iter()
                .all(|s| *s == LabelSet::full(2)));
            // the loop stopped on the budget guard, not on elimination
            assert!(trace.queries_used <= 3_000);
            assert!(trace.r_min_level >= 1);
        }
    }

    #[test]
    fn trace_accounting_is_consistent() {
        let dist = UniformConst::new(1, vec![0.7, 0.3], "lean".into()).unwrap();
        let trace =
            run_nonadaptive_seeded(&dist, 5_000, 0.05, 1.0, 0.3, Some(6), 77).unwrap();
        let total: u64 = trace.levels.iter().map(|lt| lt.queries).sum();
        assert_eq!(total, trace.queries_used);
        for lt in &trace.levels {
            assert!(lt.queries <= lt.active_cells as u64 * lt.per_cell_queries);
        }
        // candidate sets never grow level to level
        for lt in &trace.levels {
            for rec in &lt.cells {
                assert!(rec.set_after.is_subset_of(LabelSet::full(2)));
            }
        }
    }

    #[test]
    fn candidate_sets_shrink_down_the_levels() {
        // a child's post-elimination set is contained in its parent's
        let dist = crate::dist::Ramp1d::new(0.4123, 1.0, "ramp".into()).unwrap();
        let trace =
            run_nonadaptive_seeded(&dist, 60_000, 0.05, 1.0, 1.0, Some(8), 13).unwrap();
        for w in trace.levels.windows(2) {
            let parents = &w[0];
            for rec in &w[1].cells {
                let parent = rec.cell.parent().unwrap();
                if let Some(prec) = parents.cells.iter().find(|p| p.cell == parent) {
                    assert!(rec.set_after.is_subset_of(prec.set_after));
                }
            }
        }
        assert!(trace.levels.len() >= 3);
    }

    #[test]
    fn trace_serializes_to_json_with_level_arrays() {
        let dist = UniformConst::new(1, vec![0.8, 0.2], "lean".into()).unwrap();
        let trace = run_nonadaptive_seeded(&dist, 4_000, 0.05, 1.0, 0.3, Some(4), 21).unwrap();
        let json = serde_json::to_string(&trace).unwrap();
        let back: NonAdaptiveTrace = serde_json::from_str(&json).unwrap();
        assert_eq!(back.levels.len(), trace.levels.len());
        assert_eq!(back.queries_used, trace.queries_used);
        assert_eq!(back.map, trace.map);
    }

    #[test]
    fn support_empty_cells_inherit() {
        // no support on [0, 1/2): cells there must keep the inherited set
        let dist = PiecewiseConst1d::new(
            vec![0.0, 0.5, 1.0],
            vec![vec![0.9, 0.1], vec![0.9, 0.1]],
            vec![0.0, 2.0],
            "half".into(),
        )
        .unwrap();
        let trace =
            run_nonadaptive_seeded(&dist, 20_000, 0.05, 1.0, 0.2, Some(3), 5).unwrap();
        let some_empty = trace.levels.iter().any(|lt| lt.support_empty > 0);
        assert!(some_empty);
        // left half: inherited (full) set; right half: settles to label 1
        assert_eq!(trace.map.classify(&[0.75]).unwrap(), 1);
        assert_eq!(trace.map.set_of(&crate::dyadic::cell_at(&[0.25], 3).unwrap()), LabelSet::full(2));
    }

    #[test]
    fn budget_too_small_skips_every_level() {
        let dist = UniformConst::new(1, vec![0.9, 0.1], "tiny".into()).unwrap();
        // charge for level 1 exceeds the budget: nothing runs, full sets out
        let trace = run_nonadaptive_seeded(&dist, 5, 0.05, 1.0, 1.0, Some(4), 3).unwrap();
        assert_eq!(trace.queries_used, 0);
        assert_eq!(trace.r_min_level, 0);
        assert!(trace.map.sets().iter().all(|s| *s == LabelSet::full(2)));
    }
}
