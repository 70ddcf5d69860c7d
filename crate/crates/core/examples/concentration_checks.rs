//! Direct numeric checks of the concentration facts behind the ensemble
//! analysis: the exhaustive likelihood-ratio floor, the anti-concentration
//! frequency for biased coins, and a multiplicative Chernoff tail.
//!
//! Run with: cargo run --release --example concentration_checks

use margin_active::lowerbound::{
    anticoncentration_check, c4_constant, chernoff_check, likelihood_ratio_bound_check,
};

fn main() -> anyhow::Result<()> {
    println!("likelihood-ratio floor (exhaustive over all sequences):");
    for q in [0.05f64, 0.1, 0.2] {
        let n_max = (20u32).min((0.5 / (q * q)).floor() as u32);
        let rep = likelihood_ratio_bound_check(n_max, q)?;
        println!(
            "  q = {q}: max ratio {:.4} at (m = {}, ones = {})  [c4 = {:.2}] {}",
            rep.max_ratio,
            rep.worst.0,
            rep.worst.1,
            c4_constant(),
            if rep.pass { "ok" } else { "VIOLATED" }
        );
    }

    println!("\nanti-concentration: P(mean < 1/2) for Ber(1/2 + delta), m = floor(delta^-2/2):");
    for (delta, m) in [(0.01, 5000u64), (0.05, 200), (0.1, 50), (0.2, 12)] {
        let rep = anticoncentration_check(delta, m, 200_000, 5)?;
        println!(
            "  delta = {delta:<5} m = {m:<5} frequency {:.4}  (implied floor constant {:.4})",
            rep.frequency, rep.implied_c3
        );
    }

    println!("\nmultiplicative Chernoff tail P(mean >= (1+eps)p) vs exp(-m eps^2 p / 3):");
    for (p, m, eps) in [(0.5, 100u64, 0.2), (0.25, 200, 0.3), (0.1, 500, 0.5)] {
        let rep = chernoff_check(p, m, eps, 200_000, 5)?;
        println!(
            "  p = {p:<5} m = {m:<4} eps = {eps}: tail {:.5} <= bound {:.5}: {}",
            rep.empirical_tail,
            rep.bound,
            if rep.pass { "ok" } else { "VIOLATED" }
        );
    }
    Ok(())
}
