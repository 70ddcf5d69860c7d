//! Condition checking on the built-in families: smoothness, margin
//! conditions (plain and refined), and the strong density floor — plus an
//! engineered failure showing the witness machinery.
//!
//! Run with: cargo run --release --example verify_conditions

use margin_active::dist::DistConfig;
use margin_active::harness::{
    verify_dist, ChecksConfig, HolderCheckConfig, RmcCheckConfig, StrongDensityCheckConfig,
    TmcCheckConfig, VerifyConfig,
};

fn show(bundle: &margin_active::harness::VerifyBundle) {
    println!("spec `{}` -> {}", bundle.spec, if bundle.pass { "pass" } else { "FAIL" });
    for r in &bundle.reports {
        print!(
            "  {:<16} {}  constant {:.4}",
            r.condition,
            if r.pass { "pass" } else { "FAIL" },
            r.measured_constant
        );
        if let Some(e) = r.measured_exponent {
            print!("  fitted exponent {e:.3}");
        }
        if let Some(t) = r.tie_mass {
            print!("  tie mass {t:.3}");
        }
        println!();
        if let Some(w) = &r.witness {
            println!("    witness: {}", w.detail);
        }
    }
}

fn main() -> anyhow::Result<()> {
    let taus = vec![0.02, 0.05, 0.1, 0.2, 0.3, 0.5];

    // the unique-Bayes ramp satisfies everything with its stated constants
    let ramp = VerifyConfig {
        id: "ramp".into(),
        master_seed: 7,
        spec: DistConfig::Ramp {
            crossing: 0.4123,
            slope: 1.0,
            id: Some("ramp-unique".into()),
        },
        checks: ChecksConfig {
            holder: Some(HolderCheckConfig {
                lambda: 1.0,
                alpha: 1.0,
                grid_n: 500,
            }),
            tmc: Some(TmcCheckConfig {
                beta: 1.0,
                c_beta: 1.0,
                taus: taus.clone(),
                mc_n: 100_000,
            }),
            rmc: Some(RmcCheckConfig {
                epsilon: 0.0,
                beta: 1.0,
                beta_prime: 1.0,
                c_beta: 1.0,
                taus: taus.clone(),
                mc_n: 100_000,
            }),
            strong_density: Some(StrongDensityCheckConfig {
                c_d: 1.0,
                max_level: 5,
                mc_n: 200_000,
            }),
        },
    };
    show(&verify_dist(&ramp)?);

    // three-region layout: ties everywhere, top-two ties, separated labels;
    // the refined margin condition needs the tie mass as its epsilon
    let fig = VerifyConfig {
        id: "figure1".into(),
        master_seed: 7,
        spec: DistConfig::Piecewise {
            breaks: vec![0.0, 0.2, 0.6, 1.0],
            etas: vec![
                vec![1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0],
                vec![0.45, 0.45, 0.10],
                vec![0.60, 0.25, 0.15],
            ],
            weights: vec![1.0, 1.0, 1.0],
            id: Some("figure1".into()),
        },
        checks: ChecksConfig {
            rmc: Some(RmcCheckConfig {
                epsilon: 0.6,
                beta: 1.0,
                beta_prime: 1.0,
                c_beta: 2.0,
                taus: taus.clone(),
                mc_n: 100_000,
            }),
            ..Default::default()
        },
    };
    show(&verify_dist(&fig)?);

    // understating the smoothness constant by 2x fails with a witness pair
    let bad = VerifyConfig {
        id: "ramp-understated".into(),
        master_seed: 7,
        spec: DistConfig::Ramp {
            crossing: 0.4123,
            slope: 1.0,
            id: Some("ramp-lambda-understated".into()),
        },
        checks: ChecksConfig {
            holder: Some(HolderCheckConfig {
                lambda: 0.5,
                alpha: 1.0,
                grid_n: 500,
            }),
            ..Default::default()
        },
    };
    show(&verify_dist(&bad)?);
    Ok(())
}
