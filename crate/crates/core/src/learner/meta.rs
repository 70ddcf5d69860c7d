//! Smoothness-adaptive wrapper around the non-adaptive routine.
//!
//! The total budget `n` is split evenly over a grid of trial smoothness
//! exponents `alpha_i = i / rounds`; each round runs the non-adaptive
//! routine and its surviving candidate sets are intersected into the running
//! aggregate — but only when the intersection stays nonempty in every cell,
//! so one bad round cannot wipe out a cell's candidates.

use super::nonadaptive::{auto_output_level, run_nonadaptive};
use super::{CandidateLabelMap, QueryOracle};
use crate::dist::Dist;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Default cap on the number of rounds; `floor(ln n)^3` outgrows any
/// desk-scale budget's ability to fund distinct rounds well before this.
pub const DEFAULT_MAX_ROUNDS: usize = 1000;

/// Outcome of one adaptive run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MetaRun {
    pub map: CandidateLabelMap,
    pub queries_used: u64,
    /// Rounds executed (the smoothness grid size).
    pub rounds: usize,
    /// Rounds whose candidate sets were aggregated.
    pub rounds_accepted: usize,
    pub r0_level: u32,
    pub n0: f64,
    pub delta0: f64,
}

/// Intersects `round` into `agg` cellwise, unless some cell's intersection
/// would come out empty — in that case nothing is applied. Returns whether
/// the round was accepted.
pub fn meta_aggregate(agg: &mut CandidateLabelMap, round: &CandidateLabelMap) -> bool {
    debug_assert_eq!(agg.len(), round.len());
    let ok = (0..agg.len()).all(|i| !agg.set_at(i).intersect(round.set_at(i)).is_empty());
    if ok {
        for i in 0..agg.len() {
            let merged = agg.set_at(i).intersect(round.set_at(i));
            agg.set_set(i, merged);
        }
    }
    ok
}

/// Runs the adaptive learner with total budget `n` and confidence `delta`.
///
/// Per-round budget and confidence are `n / floor(ln n)^3` and
/// `delta / floor(ln n)^3`; the output resolution is
/// `r0 = 2^floor(log2(n0^(-1/d)))`. The smoothness grid has
/// `min(floor(ln n)^3, max_rounds)` points spanning `(0, 1]`.
pub fn run_meta(
    dist: &dyn Dist,
    n: u64,
    delta: f64,
    lambda: f64,
    max_rounds: Option<usize>,
    seed: u64,
) -> Result<MetaRun> {
    if (n as f64) < std::f64::consts::E.powi(3) {
        return Err(Error::domain("meta learner needs n >= e^3"));
    }
    if !(0.0 < delta && delta < 1.0) {
        return Err(Error::domain("delta must lie in (0,1)"));
    }
    let t = (n as f64).ln().floor();
    let t3 = t * t * t;
    let n0 = n as f64 / t3;
    let delta0 = delta / t3;
    let d = dist.dim();
    let l = dist.label_count();
    let r0_level = auto_output_level(n0, d);
    let rounds = (t3 as usize).min(max_rounds.unwrap_or(DEFAULT_MAX_ROUNDS)).max(1);

    let mut agg = CandidateLabelMap::full(r0_level, d, l);
    let mut oracle = QueryOracle::new(dist, n, crate::util::derive_seed(seed, &[0]));
    let mut accepted = 0usize;
    for i in 1..=rounds {
        let alpha_i = i as f64 / rounds as f64;
        let trace = run_nonadaptive(&mut oracle, n0, delta0, alpha_i, lambda, r0_level)?;
        if meta_aggregate(&mut agg, &trace.map) {
            accepted += 1;
        }
    }
    Ok(MetaRun {
        map: agg,
        queries_used: oracle.meter.used(),
        rounds,
        rounds_accepted: accepted,
        r0_level,
        n0,
        delta0,
    })
}
