//! Acceptance suite: ten gate criteria, one test each, every tolerance
//! pinned in code. Each test prints a single `ACCEPTANCE <k> ...: PASS/FAIL`
//! line before asserting, so a test run doubles as a readable report.
//!
//! All randomness is seeded; the suite is deterministic end to end.

use margin_active::dist::lowerbound::{sample_zsigma, LowerBoundDist, LowerBoundParams};
use margin_active::dist::DistConfig;
use margin_active::harness::{
    records_to_csv, run_experiment, run_lowerbound_experiment, verify_dist, ChecksConfig,
    EvalConfig, ExperimentConfig, HolderCheckConfig, LearnerConfig, LowerBoundExpConfig,
    RmcCheckConfig, StrongDensityCheckConfig, TmcCheckConfig, VerifyConfig,
};
use margin_active::labels::LabelSet;
use margin_active::learner::{run_nonadaptive_seeded, stream_seed, CandidateLabelMap};
use margin_active::lowerbound::{
    anticoncentration_check, c4_constant, chernoff_check, likelihood_ratio_bound_check,
    run_uniform_labelings, EnsembleLearner, LbLabeling,
};
use margin_active::risk::excess_risk_exact;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const MASTER: u64 = 42;

fn report(criterion: u32, name: &str, pass: bool, detail: &str) {
    println!(
        "ACCEPTANCE {criterion} ({name}): {} — {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
}

fn ramp_dist() -> DistConfig {
    DistConfig::Ramp {
        crossing: 0.4123,
        slope: 1.0,
        id: Some("ramp-unique".into()),
    }
}

fn figure1_dist() -> DistConfig {
    DistConfig::Piecewise {
        breaks: vec![0.0, 0.2, 0.6, 1.0],
        etas: vec![
            vec![1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0],
            vec![0.45, 0.45, 0.10],
            vec![0.60, 0.25, 0.15],
        ],
        weights: vec![1.0, 1.0, 1.0],
        id: Some("figure1".into()),
    }
}

/// Criterion 1 — the elimination learner never drops a label that is Bayes
/// somewhere in an output cell: over 200 seeded runs on three built-in
/// specs at delta0 = 0.05, the violation frequency stays below
/// 0.05 + 3 binomial standard errors.
#[test]
fn acceptance_1_never_eliminate_bayes() {
    let delta0 = 0.05;
    // (spec, n0, lambda, output level, runs)
    let cases: Vec<(DistConfig, u64, f64, u32, usize)> = vec![
        (ramp_dist(), 16_384, 1.0, 5, 67),
        (
            DistConfig::UniformConst {
                dimension: 1,
                eta: vec![0.5, 0.3, 0.2],
                id: Some("three-label".into()),
            },
            100_000,
            0.4,
            5,
            67,
        ),
        (figure1_dist(), 16_384, 1.0, 5, 66),
    ];
    let mut runs = 0usize;
    let mut violations = 0usize;
    let mut eliminations = 0u64;
    for (ci, (spec, n0, lambda, r0, reps)) in cases.into_iter().enumerate() {
        let dist = spec.build().unwrap();
        let part = margin_active::dyadic::DyadicPartition::new(r0, dist.dim()).unwrap();
        for rep in 0..reps {
            let seed = stream_seed(MASTER, &[1, ci as u64, rep as u64]);
            let trace = run_nonadaptive_seeded(
                dist.as_ref(),
                n0,
                delta0,
                1.0,
                lambda,
                Some(r0),
                seed,
            )
            .unwrap();
            assert!(trace.queries_used <= n0, "budget violated");
            for lt in &trace.levels {
                for rec in &lt.cells {
                    if rec.set_after.len() < dist.label_count() {
                        eliminations += 1;
                    }
                }
            }
            let mut bad = false;
            for (idx, cell) in part.cells().enumerate() {
                if let Some(bayes) = dist.bayes_labels_in_cell(&cell) {
                    if !bayes.is_subset_of(trace.map.set_at(idx)) {
                        bad = true;
                    }
                }
            }
            runs += 1;
            if bad {
                violations += 1;
            }
        }
    }
    let freq = violations as f64 / runs as f64;
    let bound = 0.05 + 3.0 * (0.05f64 * 0.95 / runs as f64).sqrt();
    let pass = freq <= bound && runs == 200;
    report(
        1,
        "never-eliminate-bayes",
        pass,
        &format!(
            "{violations}/{runs} runs dropped a Bayes label (freq {freq:.4} vs bound {bound:.4}); \
             {eliminations} cell eliminations exercised"
        ),
    );
    assert!(pass);
    // the check must not be vacuous: eliminations really happened
    assert!(eliminations > 0, "no eliminations occurred anywhere");
}

/// Criterion 2 — budget safety: across a grid of runs of every learner,
/// queries used never exceed the stated budget. Zero violations allowed.
#[test]
fn acceptance_2_budget_safety() {
    let mut checked = 0usize;

    // elimination + passive learners on the ramp through the harness
    let cfg = ExperimentConfig {
        id: "budget-safety".into(),
        master_seed: MASTER,
        spec: ramp_dist(),
        learners: vec![
            LearnerConfig::Nonadaptive {
                delta0: 0.05,
                alpha: 1.0,
                lambda: 1.0,
                r0_level: Some(8),
            },
            LearnerConfig::Passive {
                alpha: 1.0,
                level: None,
            },
            LearnerConfig::Meta {
                delta: 0.05,
                lambda: 1.0,
            },
        ],
        budgets: vec![300, 1_500, 20_000],
        seeds: None,
        seed_count: Some(6),
        evaluation: EvalConfig::Exact,
        record_timings: false,
    };
    let out = run_experiment(&cfg, 0, None).unwrap();
    let mut violations = 0usize;
    for r in &out.records {
        checked += 1;
        if r.queries_used > r.n {
            violations += 1;
        }
    }

    // ensemble learners on the hard instance
    let lb = run_lowerbound_experiment(
        &LowerBoundExpConfig {
            id: "budget-safety-lb".into(),
            master_seed: MASTER,
            alpha: 1.0,
            beta: 1.0,
            lambda: 1.0,
            dimension: 1,
            budgets: vec![1 << 10, 1 << 13],
            draws: 10,
            learners: vec![
                EnsembleLearner::Meta {
                    delta: 0.05,
                    lambda: 1.0,
                },
                EnsembleLearner::NpUniform,
                EnsembleLearner::Passive {
                    alpha: 1.0,
                    level: None,
                },
            ],
        },
        0,
    )
    .unwrap();
    for res in &lb.results {
        for le in &res.learners {
            // mean queries over draws; the runner also hard-errors on overdraw
            checked += le.risks.len();
            if le.mean_queries > res.n as f64 {
                violations += 1;
            }
        }
    }
    let pass = violations == 0;
    report(
        2,
        "budget-safety",
        pass,
        &format!("{checked} runs checked, {violations} violations"),
    );
    assert!(pass);
}

/// Criterion 3 — the exact excess risk of the hard-instance construction
/// equals the sum of its per-cell contributions to 1e-12, over 20 coin
/// draws and 5 classifiers.
#[test]
fn acceptance_3_risk_decomposition() {
    let params = LowerBoundParams::from_level(3, 1.0, 1.0, 1.0, 1).unwrap();
    let cells = params.partition().len();
    let mut worst: f64 = 0.0;
    let mut cases = 0usize;
    for draw in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(MASTER, &[3, draw]));
        let zs = sample_zsigma(&params, &mut rng);
        let dist = LowerBoundDist::new(params.clone(), zs, format!("lb-{draw}"));
        let mut classifier_rng = ChaCha8Rng::seed_from_u64(stream_seed(MASTER, &[3, draw, 99]));
        let classifiers: Vec<CandidateLabelMap> = vec![
            CandidateLabelMap::constant(3, 1, LabelSet::singleton(1), 2),
            CandidateLabelMap::constant(3, 1, LabelSet::singleton(2), 2),
            // the coin-informed classifier and its opposite
            CandidateLabelMap::new(
                3,
                1,
                2,
                (0..cells)
                    .map(|i| LabelSet::singleton(dist.bayes_label_of_cell(i)))
                    .collect(),
            ),
            CandidateLabelMap::new(
                3,
                1,
                2,
                (0..cells)
                    .map(|i| LabelSet::singleton(3 - dist.bayes_label_of_cell(i)))
                    .collect(),
            ),
            CandidateLabelMap::new(
                3,
                1,
                2,
                (0..cells)
                    .map(|_| {
                        use rand::Rng;
                        LabelSet::singleton(if classifier_rng.random::<f64>() < 0.5 {
                            1
                        } else {
                            2
                        })
                    })
                    .collect(),
            ),
        ];
        for map in &classifiers {
            let total = excess_risk_exact(map, &dist).unwrap().value;
            let sum: f64 = dist.per_cell_excess(map).iter().map(|(_, r)| r).sum();
            worst = worst.max((total - sum).abs());
            cases += 1;
        }
    }
    let pass = worst <= 1e-12 && cases == 100;
    report(
        3,
        "risk-decomposition",
        pass,
        &format!("{cases} classifier/draw cases, max |total - sum| = {worst:.2e}"),
    );
    assert!(pass);
}

/// Criterion 4 — no-gain trend on the hard-instance ensemble: the adaptive
/// learner's fitted ensemble-risk exponent sits within ±0.15 of -2/3 and is
/// not more negative than the passive plug-in's by more than 0.1.
/// Grid n = 2^10..2^16, 50 coin draws per budget.
#[test]
fn acceptance_4_no_gain_trend() {
    let cfg = LowerBoundExpConfig {
        id: "no-gain".into(),
        master_seed: MASTER,
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
        ],
    };
    let out = run_lowerbound_experiment(&cfg, 0).unwrap();
    let slope = |id: &str| {
        out.fits
            .iter()
            .find(|f| f.learner == id)
            .and_then(|f| f.fit.as_ref())
            .map(|f| f.slope)
            .expect("fit present")
    };
    let meta = slope("meta");
    let passive = slope("passive");
    let target = -2.0 / 3.0;
    let in_window = (meta - target).abs() <= 0.15;
    let no_gain = meta >= passive - 0.1;
    let pass = in_window && no_gain;
    report(
        4,
        "no-gain-trend",
        pass,
        &format!(
            "meta slope {meta:+.4} (target {target:+.4} ± 0.15), passive {passive:+.4}, \
             gap {:+.4} (allowed ≥ -0.1)",
            meta - passive
        ),
    );
    assert!(pass);
}

/// Criterion 5 — gain trend under a unique Bayes label: on the linear-
/// boundary instance with alpha = beta' = d = 1, the elimination learner's
/// fitted exponent reaches -0.85 or steeper (target -1) while the passive
/// plug-in stays at -0.8 or shallower (target -2/3), on a shared budget
/// grid and shared seeds.
#[test]
fn acceptance_5_gain_trend_unique_bayes() {
    let cfg = ExperimentConfig {
        id: "gain-unique-bayes".into(),
        master_seed: MASTER,
        spec: ramp_dist(),
        learners: vec![
            LearnerConfig::Nonadaptive {
                delta0: 0.05,
                alpha: 1.0,
                lambda: 1.0,
                r0_level: Some(12),
            },
            LearnerConfig::Passive {
                alpha: 1.0,
                level: None,
            },
        ],
        budgets: (16..=22).map(|e| 1u64 << e).collect(),
        seeds: None,
        seed_count: Some(24),
        evaluation: EvalConfig::Exact,
        record_timings: false,
    };
    let out = run_experiment(&cfg, 0, None).unwrap();
    let slope = |id: &str| {
        out.fits
            .iter()
            .find(|f| f.learner == id)
            .and_then(|f| f.fit.as_ref())
            .map(|f| f.slope)
            .expect("fit present")
    };
    let active = slope("nonadaptive");
    let passive = slope("passive");
    let pass = active <= -0.85 && passive >= -0.8;
    report(
        5,
        "gain-trend-unique-bayes",
        pass,
        &format!(
            "active slope {active:+.4} (need ≤ -0.85, target -1), \
             passive {passive:+.4} (need ≥ -0.8, target -2/3)"
        ),
    );
    assert!(pass);
    assert!(out.records.iter().all(|r| r.queries_used <= r.n));
}

/// Criterion 6 — labeling optimality under a fixed uniform sampling rule:
/// the likelihood-ratio labeler beats always-1, random, and minority-vote
/// by more than two standard errors and coincides with majority vote.
#[test]
fn acceptance_6_np_optimality() {
    let n = 1u64 << 12;
    let draws = 100u64;
    let params = LowerBoundParams::from_budget(n, 1.0, 1.0, 1.0, 1).unwrap();
    let labelings = [
        LbLabeling::Np,
        LbLabeling::Majority,
        LbLabeling::Always1,
        LbLabeling::Random,
        LbLabeling::Minority,
    ];
    let mut risks: Vec<Vec<f64>> = vec![Vec::new(); labelings.len()];
    for draw in 0..draws {
        let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(MASTER, &[6, draw]));
        let zs = sample_zsigma(&params, &mut rng);
        let dist = LowerBoundDist::new(params.clone(), zs, format!("lb-{draw}"));
        let (maps, used) =
            run_uniform_labelings(&dist, n, &labelings, stream_seed(MASTER, &[6, draw, 7]))
                .unwrap();
        assert!(used <= n);
        for (i, (_, map)) in maps.iter().enumerate() {
            risks[i].push(excess_risk_exact(map, &dist).unwrap().value);
        }
    }
    let summarize = |rs: &[f64]| {
        let mean = rs.iter().sum::<f64>() / rs.len() as f64;
        let var = rs.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>()
            / (rs.len() as f64 - 1.0);
        (mean, (var / rs.len() as f64).sqrt())
    };
    let (np_mean, _) = summarize(&risks[0]);
    let (maj_mean, maj_se) = summarize(&risks[1]);
    let (a1_mean, a1_se) = summarize(&risks[2]);
    let (rnd_mean, rnd_se) = summarize(&risks[3]);
    let (min_mean, min_se) = summarize(&risks[4]);
    // identical per draw: the likelihood rule reduces to majority vote
    let coincide = risks[0]
        .iter()
        .zip(&risks[1])
        .all(|(a, b)| a == b);
    let beats_all = np_mean <= a1_mean - 2.0 * a1_se
        && np_mean <= rnd_mean - 2.0 * rnd_se
        && np_mean <= min_mean - 2.0 * min_se;
    let within_majority = (np_mean - maj_mean).abs() <= 2.0 * maj_se;
    let pass = beats_all && within_majority && coincide;
    report(
        6,
        "np-optimality",
        pass,
        &format!(
            "np {np_mean:.2e} vs always-1 {a1_mean:.2e}±{a1_se:.1e}, random {rnd_mean:.2e}±{rnd_se:.1e}, \
             minority {min_mean:.2e}±{min_se:.1e}; majority identical: {coincide}"
        ),
    );
    assert!(pass);
}

/// Criterion 7 — likelihood-ratio floor: exhaustively over all binary label
/// sequences with up to 20 observations (and within the sampling cap
/// m <= q^-2/2), the flat-coin likelihood never exceeds c4 = 16 e^2 times
/// the sign-averaged likelihood. Exact arithmetic, no tolerance.
#[test]
fn acceptance_7_likelihood_ratio_bound() {
    let c4 = c4_constant();
    let mut worst = 0.0f64;
    let mut all_pass = true;
    let mut detail = String::new();
    for &q in &[0.05f64, 0.1, 0.2] {
        let n_max = (20u32).min((0.5 / (q * q)).floor() as u32);
        let rep = likelihood_ratio_bound_check(n_max, q).unwrap();
        worst = worst.max(rep.max_ratio);
        all_pass &= rep.pass;
        detail.push_str(&format!(
            "q={q}: max ratio {:.4} at (m={}, ones={}); ",
            rep.max_ratio, rep.worst.0, rep.worst.1
        ));
    }
    let pass = all_pass && worst <= c4;
    report(
        7,
        "likelihood-ratio-bound",
        pass,
        &format!("{detail}c4 = {c4:.2}"),
    );
    assert!(pass);
}

/// Criterion 8 — concentration reports: the anti-concentration frequency
/// matches the exact binomial oracle and stays above 0.01 across the
/// admissible sweep; the Chernoff tail respects its bound and matches the
/// exact binomial tail.
#[test]
fn acceptance_8_concentration_reports() {
    use statrs::distribution::{Binomial, DiscreteCDF};

    // exact oracle for P(mean < 1/2) at Ber(0.55), m = 200: P(S <= 99)
    let oracle = Binomial::new(0.55, 200).unwrap().cdf(99);
    assert!(
        (oracle - 0.06807524986274854).abs() < 1e-9,
        "binomial oracle drifted: {oracle}"
    );
    let rep = anticoncentration_check(0.05, 200, 100_000, stream_seed(MASTER, &[8, 1])).unwrap();
    let anti_match = (rep.frequency - oracle).abs() <= 0.003;

    // the floor holds across admissible (delta, m) pairs, m = floor(delta^-2/2)
    let mut floor_ok = true;
    let mut floor_detail = String::new();
    for &(delta, m) in &[(0.01, 5000u64), (0.05, 200), (0.1, 50), (0.2, 12)] {
        let r = anticoncentration_check(delta, m, 50_000, stream_seed(MASTER, &[8, 2])).unwrap();
        floor_ok &= r.frequency >= 0.01;
        floor_detail.push_str(&format!("({delta},{m})→{:.3} ", r.frequency));
    }

    // Chernoff: bound respected and empirical tail matches the exact tail
    let chern = chernoff_check(0.5, 100, 0.2, 100_000, stream_seed(MASTER, &[8, 3])).unwrap();
    let exact_tail = 1.0 - Binomial::new(0.5, 100).unwrap().cdf(59);
    assert!((exact_tail - 0.02844396682049044).abs() < 1e-9);
    let chern_ok = chern.pass
        && (chern.bound - 0.513417119032592).abs() < 1e-12
        && (chern.empirical_tail - exact_tail).abs() <= 3.0 * chern.tail_se;

    let pass = anti_match && floor_ok && chern_ok;
    report(
        8,
        "concentration-reports",
        pass,
        &format!(
            "anti-concentration freq {:.4} vs exact {oracle:.4}; floor: {floor_detail}; \
             chernoff tail {:.4} ≤ bound {:.4}",
            rep.frequency, chern.empirical_tail, chern.bound
        ),
    );
    assert!(pass);
}

/// Criterion 9 — condition-checker correctness: six positive cases pass and
/// three engineered negative cases fail with concrete witnesses.
#[test]
fn acceptance_9_checker_cases() {
    let taus = vec![0.02, 0.05, 0.1, 0.2, 0.3, 0.5];
    let mut positives = 0;
    let mut negatives = 0;
    let mut failures: Vec<String> = Vec::new();

    // -- positive cases ---------------------------------------------------
    let pos: Vec<(&str, VerifyConfig)> = vec![
        (
            "ramp holder",
            VerifyConfig {
                id: "p1".into(),
                master_seed: stream_seed(MASTER, &[9, 1]),
                spec: ramp_dist(),
                checks: ChecksConfig {
                    holder: Some(HolderCheckConfig {
                        lambda: 1.0,
                        alpha: 1.0,
                        grid_n: 500,
                    }),
                    ..Default::default()
                },
            },
        ),
        (
            "ramp tmc",
            VerifyConfig {
                id: "p2".into(),
                master_seed: stream_seed(MASTER, &[9, 2]),
                spec: ramp_dist(),
                checks: ChecksConfig {
                    tmc: Some(TmcCheckConfig {
                        beta: 1.0,
                        c_beta: 1.0,
                        taus: taus.clone(),
                        mc_n: 100_000,
                    }),
                    ..Default::default()
                },
            },
        ),
        (
            "figure1 rmc",
            VerifyConfig {
                id: "p3".into(),
                master_seed: stream_seed(MASTER, &[9, 3]),
                spec: figure1_dist(),
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
            },
        ),
        (
            "lower-bound holder",
            VerifyConfig {
                id: "p4".into(),
                master_seed: stream_seed(MASTER, &[9, 4]),
                spec: DistConfig::LowerBound {
                    dimension: 1,
                    alpha: 1.0,
                    lambda: 1.0,
                    beta: 1.0,
                    budget: None,
                    level: Some(3),
                    coin_seed: 11,
                    id: None,
                },
                checks: ChecksConfig {
                    holder: Some(HolderCheckConfig {
                        lambda: 1.0,
                        alpha: 1.0,
                        grid_n: 500,
                    }),
                    ..Default::default()
                },
            },
        ),
        (
            "lower-bound strong density",
            VerifyConfig {
                id: "p5".into(),
                master_seed: stream_seed(MASTER, &[9, 5]),
                spec: DistConfig::LowerBound {
                    dimension: 1,
                    alpha: 1.0,
                    lambda: 1.0,
                    beta: 1.0,
                    budget: None,
                    level: Some(2),
                    coin_seed: 12,
                    id: None,
                },
                checks: ChecksConfig {
                    strong_density: Some(StrongDensityCheckConfig {
                        c_d: 1.0,
                        max_level: 5,
                        mc_n: 200_000,
                    }),
                    ..Default::default()
                },
            },
        ),
        (
            "uniform strong density",
            VerifyConfig {
                id: "p6".into(),
                master_seed: stream_seed(MASTER, &[9, 6]),
                spec: DistConfig::UniformConst {
                    dimension: 1,
                    eta: vec![0.5, 0.5],
                    id: None,
                },
                checks: ChecksConfig {
                    strong_density: Some(StrongDensityCheckConfig {
                        c_d: 1.0,
                        max_level: 5,
                        mc_n: 200_000,
                    }),
                    ..Default::default()
                },
            },
        ),
    ];
    for (name, cfg) in pos {
        let bundle = verify_dist(&cfg).unwrap();
        if bundle.pass {
            positives += 1;
        } else {
            failures.push(format!("positive case `{name}` failed"));
        }
    }

    // -- engineered negative cases ---------------------------------------
    // understated smoothness constant
    let neg1 = verify_dist(&VerifyConfig {
        id: "n1".into(),
        master_seed: stream_seed(MASTER, &[9, 7]),
        spec: ramp_dist(),
        checks: ChecksConfig {
            holder: Some(HolderCheckConfig {
                lambda: 0.5,
                alpha: 1.0,
                grid_n: 500,
            }),
            ..Default::default()
        },
    })
    .unwrap();
    // overstated margin exponent
    let neg2 = verify_dist(&VerifyConfig {
        id: "n2".into(),
        master_seed: stream_seed(MASTER, &[9, 8]),
        spec: ramp_dist(),
        checks: ChecksConfig {
            tmc: Some(TmcCheckConfig {
                beta: 2.0,
                c_beta: 1.0,
                taus: taus.clone(),
                mc_n: 100_000,
            }),
            ..Default::default()
        },
    })
    .unwrap();
    // a thin-density region breaks the strong density floor
    let neg3 = verify_dist(&VerifyConfig {
        id: "n3".into(),
        master_seed: stream_seed(MASTER, &[9, 9]),
        spec: DistConfig::Piecewise {
            breaks: vec![0.0, 0.5, 1.0],
            etas: vec![vec![0.9, 0.1], vec![0.9, 0.1]],
            weights: vec![0.1, 1.9],
            id: Some("thin-left".into()),
        },
        checks: ChecksConfig {
            strong_density: Some(StrongDensityCheckConfig {
                c_d: 1.0,
                max_level: 4,
                mc_n: 100_000,
            }),
            ..Default::default()
        },
    })
    .unwrap();
    for (name, bundle) in [("holder", &neg1), ("tmc", &neg2), ("strong-density", &neg3)] {
        let with_witness = !bundle.pass && bundle.reports.iter().any(|r| r.witness.is_some());
        if with_witness {
            negatives += 1;
        } else {
            failures.push(format!("negative case `{name}` did not fail with a witness"));
        }
    }

    let pass = positives == 6 && negatives == 3;
    report(
        9,
        "checker-cases",
        pass,
        &format!("{positives}/6 positive, {negatives}/3 negative with witnesses; {failures:?}"),
    );
    assert!(pass);
}

/// Criterion 10 — determinism: two executions of the same config produce a
/// byte-identical records CSV, both in-process and through the CLI binary.
#[test]
fn acceptance_10_determinism() {
    let cfg = ExperimentConfig {
        id: "determinism".into(),
        master_seed: MASTER,
        spec: ramp_dist(),
        learners: vec![
            LearnerConfig::Nonadaptive {
                delta0: 0.05,
                alpha: 1.0,
                lambda: 1.0,
                r0_level: Some(6),
            },
            LearnerConfig::Passive {
                alpha: 1.0,
                level: None,
            },
        ],
        budgets: vec![2_000, 8_000, 32_000],
        seeds: None,
        seed_count: Some(4),
        evaluation: EvalConfig::MonteCarlo { points: 20_000 },
        record_timings: false,
    };
    let a = records_to_csv(&run_experiment(&cfg, 2, None).unwrap().records);
    let b = records_to_csv(&run_experiment(&cfg, 1, None).unwrap().records);
    let in_process = a == b;

    // through the binary, twice, from the shipped config
    let exe = env!("CARGO_BIN_EXE_margin-active");
    let config_path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/ramp_rates.json");
    let run_cli = |dir: &std::path::Path| {
        let status = std::process::Command::new(exe)
            .args([
                "--out",
                dir.to_str().unwrap(),
                "simulate",
                "--config",
                config_path,
            ])
            .status()
            .expect("binary runs");
        assert!(status.success());
        std::fs::read(dir.join("records.csv")).expect("records written")
    };
    let d1 = tempfile::tempdir().unwrap();
    let d2 = tempfile::tempdir().unwrap();
    let c1 = run_cli(d1.path());
    let c2 = run_cli(d2.path());
    let via_cli = c1 == c2;

    let pass = in_process && via_cli;
    report(
        10,
        "determinism",
        pass,
        &format!(
            "in-process identical: {in_process}; CLI records.csv identical: {via_cli} ({} bytes)",
            c1.len()
        ),
    );
    assert!(pass);
}

/// Companion to criterion 4: the likelihood-ratio learner's own ensemble
/// risk follows the no-gain exponent on budgets aligned with the
/// construction's sampling-bias coupling (n = 64 r^-3 exactly dyadic).
#[test]
fn ensemble_np_trend_on_aligned_grid() {
    let cfg = LowerBoundExpConfig {
        id: "np-aligned".into(),
        master_seed: MASTER,
        alpha: 1.0,
        beta: 1.0,
        lambda: 1.0,
        dimension: 1,
        budgets: vec![1 << 12, 1 << 15, 1 << 18],
        draws: 400,
        learners: vec![EnsembleLearner::NpUniform],
    };
    let out = run_lowerbound_experiment(&cfg, 0).unwrap();
    let slope = out.fits[0].fit.as_ref().expect("fit").slope;
    assert!(
        (slope + 2.0 / 3.0).abs() <= 0.15,
        "np ensemble slope {slope} strays from -2/3"
    );
}

/// Companion to criterion 5: on a unique-Bayes strong-density instance the
/// finest level reached never outruns the budget-driven bound
/// `r_min <= (c7 * lambda^(b'-2) * ln(4 L lambda^2 n0 / delta0) / n0)^(1/(2a+d-ab'))`
/// with `c7 = 4 (d+1)^2 4^(2a+d) ln2 / (c_d a (2a+d-ab')) * max(1, C_b 6^b')`.
/// Checked as an inequality.
#[test]
fn r_min_stays_above_the_budget_bound() {
    let dist = ramp_dist().build().unwrap();
    let (alpha, beta_p, d, lambda, l, c_d, c_beta, delta0) =
        (1.0f64, 1.0f64, 1.0f64, 1.0f64, 2.0f64, 1.0f64, 1.0f64, 0.05f64);
    let c7 = 4.0 * (d + 1.0).powi(2) * 4.0f64.powf(2.0 * alpha + d) * 2.0f64.ln()
        / (c_d * alpha * (2.0 * alpha + d - alpha * beta_p))
        * 1.0f64.max(c_beta * 6.0f64.powf(beta_p));
    for e in [12u32, 16, 20] {
        let n0 = 1u64 << e;
        let trace = run_nonadaptive_seeded(
            dist.as_ref(),
            n0,
            delta0,
            alpha,
            lambda,
            Some(12),
            stream_seed(MASTER, &[55, e as u64]),
        )
        .unwrap();
        let bound = (c7 * lambda.powf(beta_p - 2.0)
            * (4.0 * l * lambda * lambda * n0 as f64 / delta0).ln()
            / n0 as f64)
            .powf(1.0 / (2.0 * alpha + d - alpha * beta_p));
        assert!(
            trace.r_min() <= bound,
            "r_min {} exceeds bound {bound} at n0 = {n0}",
            trace.r_min()
        );
    }
}

/// Companion property: on favorable runs (every per-cell estimate within
/// lambda * r^alpha of its target), output cells only ever carry labels
/// within 10 * lambda * r_min^alpha of the local best, and cells whose soft
/// margin is everywhere larger than that carry only Bayes labels.
#[test]
fn favorable_runs_keep_only_near_bayes_labels() {
    let dist = ramp_dist().build().unwrap();
    let lambda = 1.0;
    let mut favorable = 0usize;
    for rep in 0..40u64 {
        let trace = run_nonadaptive_seeded(
            dist.as_ref(),
            40_000,
            0.05,
            1.0,
            lambda,
            Some(6),
            stream_seed(MASTER, &[77, rep]),
        )
        .unwrap();
        // did every estimate stay within lambda * r^alpha of the cell mean?
        let mut on_event = true;
        for lt in &trace.levels {
            let r = 0.5f64.powi(lt.level as i32);
            for rec in &lt.cells {
                let total: u32 = rec.counts.iter().sum();
                if total == 0 {
                    continue;
                }
                let mean = dist.eta_cell_mean(&rec.cell).expect("analytic mean");
                for (y, &c) in rec.counts.iter().enumerate() {
                    let dev = (c as f64 / total as f64 - mean[y]).abs();
                    if dev > lambda * r.powf(1.0) {
                        on_event = false;
                    }
                }
            }
        }
        if !on_event {
            continue;
        }
        favorable += 1;
        let r_min = trace.r_min();
        let delta = 10.0 * lambda * r_min;
        let part = margin_active::dyadic::DyadicPartition::new(trace.map.level(), 1).unwrap();
        for (idx, cell) in part.cells().enumerate() {
            let set = trace.map.set_at(idx);
            let (a, b) = cell.extent(0);
            // worst-case pointwise gap of every surviving label stays below delta
            for y in set.iter() {
                let gap_at = |x: f64| {
                    let mut eta = [0.0; 2];
                    dist.eta_into(&[x], &mut eta);
                    eta[0].max(eta[1]) - eta[y as usize - 1]
                };
                let worst = gap_at(a).max(gap_at((b - 1e-12).max(a)));
                assert!(
                    worst <= delta + 1e-9,
                    "label {y} survives with pointwise gap {worst} > {delta}"
                );
            }
            // cells with soft margin everywhere above delta keep only Bayes labels
            let bayes = dist.bayes_labels_in_cell(&cell).unwrap();
            if bayes.len() == 1 {
                let margin_lo = {
                    let m_a = 2.0 * (a - 0.4123f64).abs();
                    let m_b = 2.0 * (b - 0.4123f64).abs();
                    if (a..b).contains(&0.4123) {
                        0.0
                    } else {
                        m_a.min(m_b)
                    }
                };
                if margin_lo > delta {
                    assert!(
                        set.is_subset_of(bayes),
                        "cell [{a},{b}) with margin > {delta} kept non-Bayes labels {set:?}"
                    );
                }
            }
        }
    }
    // the favorable event has probability at least 1 - delta0
    assert!(favorable >= 30, "only {favorable}/40 runs were favorable");
}
