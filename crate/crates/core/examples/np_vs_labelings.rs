//! Labeling rules under a fixed uniform sampling budget on the hard
//! instance: the likelihood-ratio rule against majority vote (identical by
//! construction), always-1, coin-flip, and minority vote.
//!
//! Run with: cargo run --release --example np_vs_labelings

use margin_active::dist::lowerbound::{sample_zsigma, LowerBoundDist, LowerBoundParams};
use margin_active::learner::stream_seed;
use margin_active::lowerbound::{run_uniform_labelings, LbLabeling};
use margin_active::risk::excess_risk_exact;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> anyhow::Result<()> {
    let n = 1u64 << 12;
    let draws = 200u64;
    let params = LowerBoundParams::from_budget(n, 1.0, 1.0, 1.0, 1)?;
    println!(
        "construction: r = 1/{}, bump bias q = {:.4}, {} queries per cell",
        1u64 << params.level,
        params.q(),
        ((params.r()) * n as f64 / 2.0).floor()
    );
    let labelings = [
        LbLabeling::Np,
        LbLabeling::Majority,
        LbLabeling::Always1,
        LbLabeling::Random,
        LbLabeling::Minority,
    ];
    let mut sums = vec![0.0f64; labelings.len()];
    let mut np_eq_majority = true;
    for draw in 0..draws {
        let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(9, &[draw]));
        let zs = sample_zsigma(&params, &mut rng);
        let dist = LowerBoundDist::new(params.clone(), zs, format!("lb-{draw}"));
        let (maps, _) = run_uniform_labelings(&dist, n, &labelings, stream_seed(9, &[draw, 1]))?;
        let mut risks = Vec::new();
        for (i, (_, map)) in maps.iter().enumerate() {
            let r = excess_risk_exact(map, &dist)?.value;
            sums[i] += r;
            risks.push(r);
        }
        np_eq_majority &= risks[0] == risks[1];
    }
    println!("ensemble risks over {draws} coin draws:");
    for (l, s) in labelings.iter().zip(&sums) {
        println!("  {:<9} {:.4e}", format!("{:?}", l).to_lowercase(), s / draws as f64);
    }
    println!("likelihood rule identical to majority vote on every draw: {np_eq_majority}");
    Ok(())
}
