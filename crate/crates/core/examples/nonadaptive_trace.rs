//! One run of the non-adaptive elimination learner, level by level: active
//! cells, per-cell sample sizes, eliminations, the finest level reached,
//! and the resulting classifier's exact excess risk.
//!
//! Run with: cargo run --release --example nonadaptive_trace

use margin_active::dist::{Dist, Ramp1d};
use margin_active::learner::run_nonadaptive_seeded;
use margin_active::risk::excess_risk_exact;

fn main() -> anyhow::Result<()> {
    let dist = Ramp1d::new(0.4123, 1.0, "ramp-unique".into())?;
    let n0 = 1u64 << 19;
    let trace = run_nonadaptive_seeded(&dist, n0, 0.05, 1.0, 1.0, Some(10), 42)?;

    println!("budget {n0}, queries used {}", trace.queries_used);
    println!("level  r        active  per-cell  queries  eliminations");
    for lt in &trace.levels {
        let elims: usize = lt
            .cells
            .iter()
            .filter(|c| c.set_after.len() < dist.label_count())
            .count();
        println!(
            "{:>5}  {:<8} {:>6}  {:>8}  {:>7}  {:>12}",
            lt.level,
            format!("1/{}", 1u64 << lt.level),
            lt.active_cells,
            lt.per_cell_queries,
            lt.queries,
            elims
        );
    }
    println!("finest completed level: r_min = {}", trace.r_min());

    let risk = excess_risk_exact(&trace.map, &dist)?;
    println!("exact excess risk of the output classifier: {:.6e}", risk.value);

    // the full trace serializes to JSON for offline inspection
    let json = serde_json::to_string(&trace)?;
    println!("trace JSON: {} bytes (pipe to a file to inspect)", json.len());
    Ok(())
}
