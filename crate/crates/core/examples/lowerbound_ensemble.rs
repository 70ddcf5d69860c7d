//! The hard-instance ensemble in action: every learner's ensemble risk on
//! the randomized per-cell-coin construction decays at the passive rate —
//! the no-gain regime. Exact per-draw risks, ensemble means, log-log fits.
//!
//! Run with: cargo run --release --example lowerbound_ensemble

use margin_active::harness::{
    ensemble_series, run_lowerbound_experiment, write_lowerbound_output, LowerBoundExpConfig,
};
use margin_active::lowerbound::EnsembleLearner;
use margin_active::plot::emit_plot;

fn main() -> anyhow::Result<()> {
    let cfg = LowerBoundExpConfig {
        id: "lb-ensemble".into(),
        master_seed: 42,
        alpha: 1.0,
        beta: 1.0,
        lambda: 1.0,
        dimension: 1,
        budgets: (10..=16).map(|e| 1u64 << e).collect(),
        draws: 50,
        learners: vec![
            EnsembleLearner::Meta {
                delta: 0.05,
                lambda: 1.0,
            },
            EnsembleLearner::Passive {
                alpha: 1.0,
                level: None,
            },
            EnsembleLearner::NpUniform,
            EnsembleLearner::Always { label: 1 },
            EnsembleLearner::BayesCheater,
        ],
    };
    let t0 = std::time::Instant::now();
    let out = run_lowerbound_experiment(&cfg, 0)?;
    println!("ensemble grid done in {:.2?}", t0.elapsed());
    println!("target exponent: -2/3 (passive minimax under strong density)");
    for fit in &out.fits {
        match &fit.fit {
            Some(f) => println!("{:<14} ensemble slope {:+.4}", fit.learner, f.slope),
            None => println!("{:<14} no fit: {}", fit.learner, fit.note),
        }
    }
    for res in &out.results {
        let line: Vec<String> = res
            .learners
            .iter()
            .map(|l| format!("{}={:.2e}±{:.1e}", l.id, l.mean, l.se))
            .collect();
        println!("n=2^{:<2} r=1/{}  {}", res.n.ilog2(), 1u64 << res.level, line.join("  "));
    }
    let dir = std::path::Path::new("out/lb-ensemble");
    write_lowerbound_output(&out, dir)?;
    emit_plot(&ensemble_series(&out.results), &dir.join("rates.svg"))?;
    println!("results written to {}", dir.display());
    Ok(())
}
