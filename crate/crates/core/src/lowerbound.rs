//! Empirical study of the hard-instance ensemble.
//!
//! A draw of the ensemble fixes per-cell coins, which fixes a distribution;
//! each learner then runs against that draw with the stated budget and its
//! excess risk is integrated exactly. Averaging over draws gives the
//! ensemble risk whose decay exponent the rate experiments measure.
//!
//! Also here: the per-cell likelihood-ratio labeler with uniform sampling,
//! alternative labeling rules to compare it against, and direct numeric
//! checks of the two concentration facts the ensemble argument uses
//! (a multiplicative Chernoff bound and a small-sample anti-concentration
//! bound for biased coins).

use crate::dist::lowerbound::{sample_zsigma, LowerBoundDist, LowerBoundParams};
use crate::labels::LabelSet;
use crate::learner::{
    np_label, run_meta, run_nonadaptive_seeded, run_passive, CandidateLabelMap, QueryOracle,
};
use crate::risk::excess_risk_exact;
use crate::util::{derive_seed, mean_se};
use crate::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// `c4 = 16 e^2`, the constant in the likelihood-ratio floor.
pub fn c4_constant() -> f64 {
    16.0 * std::f64::consts::E.powi(2)
}

/// Learners that can enter an ensemble run.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum EnsembleLearner {
    /// Smoothness-adaptive elimination learner.
    Meta { delta: f64, lambda: f64 },
    /// Non-adaptive elimination learner with known smoothness.
    Nonadaptive {
        delta0: f64,
        alpha: f64,
        lambda: f64,
        #[serde(default)]
        r0_level: Option<u32>,
    },
    /// Passive majority-vote plug-in.
    Passive {
        alpha: f64,
        #[serde(default)]
        level: Option<u32>,
    },
    /// Uniform per-cell sampling + likelihood-ratio labeling.
    NpUniform,
    /// Constant classifier.
    Always { label: u8 },
    /// Ignores the data, labels each cell by a fair coin.
    Random,
    /// Uniform sampling + minority vote (a deliberately bad labeler).
    Minority,
    /// Reads the draw's coins and labels each cell by its Bayes label.
    BayesCheater,
}

impl EnsembleLearner {
    pub fn id(&self) -> String {
        match self {
            EnsembleLearner::Meta { .. } => "meta".into(),
            EnsembleLearner::Nonadaptive { .. } => "nonadaptive".into(),
            EnsembleLearner::Passive { .. } => "passive".into(),
            EnsembleLearner::NpUniform => "np-uniform".into(),
            EnsembleLearner::Always { label } => format!("always-{label}"),
            EnsembleLearner::Random => "random".into(),
            EnsembleLearner::Minority => "minority".into(),
            EnsembleLearner::BayesCheater => "bayes-cheater".into(),
        }
    }

    /// Runs this learner against one draw; returns the classifier and the
    /// number of queries spent.
    pub fn run(&self, dist: &LowerBoundDist, n: u64, seed: u64) -> Result<(CandidateLabelMap, u64)> {
        let params = dist.params();
        match self {
            EnsembleLearner::Meta { delta, lambda } => {
                let run = run_meta(dist, n, *delta, *lambda, None, seed)?;
                Ok((run.map, run.queries_used))
            }
            EnsembleLearner::Nonadaptive {
                delta0,
                alpha,
                lambda,
                r0_level,
            } => {
                let trace =
                    run_nonadaptive_seeded(dist, n, *delta0, *alpha, *lambda, *r0_level, seed)?;
                Ok((trace.map, trace.queries_used))
            }
            EnsembleLearner::Passive { alpha, level } => {
                let (map, used) = run_passive(dist, n, *level, *alpha, seed)?;
                Ok((map, used))
            }
            EnsembleLearner::NpUniform => {
                let (mut out, used) =
                    run_uniform_labelings(dist, n, &[LbLabeling::Np], seed)?;
                Ok((out.pop().expect("one labeling").1, used))
            }
            EnsembleLearner::Minority => {
                let (mut out, used) =
                    run_uniform_labelings(dist, n, &[LbLabeling::Minority], seed)?;
                Ok((out.pop().expect("one labeling").1, used))
            }
            EnsembleLearner::Always { label } => {
                if *label < 1 || *label > 2 {
                    return Err(Error::domain("constant label must be 1 or 2"));
                }
                Ok((
                    CandidateLabelMap::constant(
                        params.level,
                        params.dim,
                        LabelSet::singleton(*label),
                        2,
                    ),
                    0,
                ))
            }
            EnsembleLearner::Random => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let cells = params.partition().len();
                let sets = (0..cells)
                    .map(|_| LabelSet::singleton(if rng.random::<f64>() < 0.5 { 1 } else { 2 }))
                    .collect();
                Ok((
                    CandidateLabelMap::new(params.level, params.dim, 2, sets),
                    0,
                ))
            }
            EnsembleLearner::BayesCheater => {
                let cells = params.partition().len();
                let sets = (0..cells)
                    .map(|idx| LabelSet::singleton(dist.bayes_label_of_cell(idx)))
                    .collect();
                Ok((
                    CandidateLabelMap::new(params.level, params.dim, 2, sets),
                    0,
                ))
            }
        }
    }
}

/// One learner's per-draw exact risks and their ensemble summary.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LearnerEnsemble {
    pub id: String,
    pub risks: Vec<f64>,
    pub mean: f64,
    pub se: f64,
    pub mean_queries: f64,
}

/// Ensemble outcome at one budget.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EnsembleResult {
    pub n: u64,
    pub alpha: f64,
    pub beta: f64,
    pub lambda: f64,
    pub dim: usize,
    /// Construction level derived from the budget.
    pub level: u32,
    pub draws: u64,
    pub learners: Vec<LearnerEnsemble>,
}

/// Runs every learner against `draws` independent coin draws of the
/// construction at budget `n`. All learners see the same draw (paired
/// comparison); each gets its own derived RNG stream.
#[allow(clippy::too_many_arguments)]
pub fn run_ensemble(
    n: u64,
    alpha: f64,
    beta: f64,
    lambda: f64,
    dim: usize,
    learners: &[EnsembleLearner],
    draws: u64,
    master_seed: u64,
) -> Result<EnsembleResult> {
    if draws == 0 {
        return Err(Error::domain("need at least one draw"));
    }
    {
        let mut ids: Vec<String> = learners.iter().map(|l| l.id()).collect();
        ids.sort();
        ids.dedup();
        if ids.len() != learners.len() {
            return Err(Error::domain("learner ids must be distinct"));
        }
    }
    let params = LowerBoundParams::from_budget(n, alpha, lambda, beta, dim)?;
    let mut risks: Vec<Vec<f64>> = vec![Vec::with_capacity(draws as usize); learners.len()];
    let mut queries: Vec<Vec<f64>> = vec![Vec::with_capacity(draws as usize); learners.len()];
    for draw in 0..draws {
        let coin_seed = derive_seed(master_seed, &[n, draw, 0]);
        let mut coin_rng = ChaCha8Rng::seed_from_u64(coin_seed);
        let zs = sample_zsigma(&params, &mut coin_rng);
        let dist = LowerBoundDist::new(params.clone(), zs, format!("lb-n{n}-d{draw}"));
        for (j, learner) in learners.iter().enumerate() {
            let seed = derive_seed(master_seed, &[n, draw, 1 + j as u64]);
            let (map, used) = learner.run(&dist, n, seed)?;
            if used > n {
                return Err(Error::BudgetExhausted { used, limit: n });
            }
            let risk = excess_risk_exact(&map, &dist)?.value;
            risks[j].push(risk);
            queries[j].push(used as f64);
        }
    }
    let learners_out = learners
        .iter()
        .zip(risks)
        .zip(queries)
        .map(|((l, r), q)| {
            let (mean, se) = mean_se(&r);
            LearnerEnsemble {
                id: l.id(),
                mean,
                se,
                mean_queries: q.iter().sum::<f64>() / q.len() as f64,
                risks: r,
            }
        })
        .collect();
    Ok(EnsembleResult {
        n,
        alpha,
        beta,
        lambda,
        dim,
        level: params.level,
        draws,
        learners: learners_out,
    })
}

/// Labeling rules over one cell's binary query outcomes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LbLabeling {
    /// Likelihood-ratio optimal sign (reduces to majority vote).
    Np,
    Majority,
    Minority,
    Always1,
    Random,
}

impl LbLabeling {
    pub fn id(&self) -> &'static str {
        match self {
            LbLabeling::Np => "np",
            LbLabeling::Majority => "majority",
            LbLabeling::Minority => "minority",
            LbLabeling::Always1 => "always-1",
            LbLabeling::Random => "random",
        }
    }
}

/// Uniform sampling rule: `floor(r^d * n / 2)` queries at each cell's bump
/// center, then every requested labeling applied to the *same* outcomes.
/// Returns the classifiers (at the construction level) and the queries used.
pub fn run_uniform_labelings(
    dist: &LowerBoundDist,
    n: u64,
    labelings: &[LbLabeling],
    seed: u64,
) -> Result<(Vec<(String, CandidateLabelMap)>, u64)> {
    let params = dist.params();
    let part = params.partition();
    let m = ((params.r().powi(params.dim as i32)) * n as f64 / 2.0).floor() as u64;
    let q = params.q();
    let mut oracle = QueryOracle::new(dist, n, derive_seed(seed, &[1]));
    let mut outcomes: Vec<Vec<u8>> = Vec::with_capacity(part.len());
    for idx in 0..part.len() {
        let x = part.cell(idx).barycenter();
        let mut ys = Vec::with_capacity(m as usize);
        for _ in 0..m {
            let y = oracle.query_at(&x)?;
            ys.push(if y == 1 { 1 } else { 0 });
        }
        outcomes.push(ys);
    }
    let used = oracle.meter.used();
    let mut rand_rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[2]));
    let random_labels: Vec<u8> = (0..part.len())
        .map(|_| if rand_rng.random::<f64>() < 0.5 { 1 } else { 0 })
        .collect();
    let mut out = Vec::with_capacity(labelings.len());
    for labeling in labelings {
        let sets = (0..part.len())
            .map(|idx| {
                let ys = &outcomes[idx];
                let one = match labeling {
                    LbLabeling::Np => np_label(ys, q)? == 1,
                    LbLabeling::Majority => crate::learner::majority_label(ys) == 1,
                    LbLabeling::Minority => crate::learner::majority_label(ys) == 0,
                    LbLabeling::Always1 => true,
                    LbLabeling::Random => random_labels[idx] == 1,
                };
                Ok(LabelSet::singleton(if one { 1 } else { 2 }))
            })
            .collect::<Result<Vec<_>>>()?;
        out.push((
            labeling.id().to_string(),
            CandidateLabelMap::new(params.level, params.dim, 2, sets),
        ));
    }
    Ok((out, used))
}

/// The likelihood-ratio learner under the default uniform sampling rule.
pub fn np_strategy(
    dist: &LowerBoundDist,
    n: u64,
    seed: u64,
) -> Result<(CandidateLabelMap, u64)> {
    let (mut maps, used) = run_uniform_labelings(dist, n, &[LbLabeling::Np], seed)?;
    Ok((maps.pop().expect("one labeling").1, used))
}

/// Exhaustive check that averaging the likelihood over the sign coin never
/// undercuts the flat-coin likelihood by more than `c4 = 16 e^2`:
/// `(1/2)^m <= c4 * E_sigma prod_i (1/2 + sigma (2 y_i - 1) q)` for every
/// binary sequence. The ratio depends on a sequence only through its count
/// of ones, so scanning all `(m, k)` pairs covers every sequence exactly.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LrBoundReport {
    pub q: f64,
    pub n_max: u32,
    pub c4: f64,
    pub max_ratio: f64,
    /// `(m, ones)` attaining the maximum ratio.
    pub worst: (u32, u32),
    pub pass: bool,
}

pub fn likelihood_ratio_bound_check(n_max: u32, q: f64) -> Result<LrBoundReport> {
    if !(0.0 < q && q < 0.5) {
        return Err(Error::domain("q must lie in (0, 1/2)"));
    }
    if n_max > 20 {
        return Err(Error::domain("enumeration capped at sequences of length 20"));
    }
    let m_cap = 0.5 / (q * q);
    if n_max as f64 > m_cap {
        return Err(Error::domain(format!(
            "n_max = {n_max} exceeds q^-2/2 = {m_cap}"
        )));
    }
    let mut max_ratio = 0.0f64;
    let mut worst = (0u32, 0u32);
    for m in 0..=n_max {
        for k in 0..=m {
            let plus = (0.5 + q).powi(k as i32) * (0.5 - q).powi((m - k) as i32);
            let minus = (0.5 - q).powi(k as i32) * (0.5 + q).powi((m - k) as i32);
            let ratio = 0.5f64.powi(m as i32) / ((plus + minus) / 2.0);
            if ratio > max_ratio {
                max_ratio = ratio;
                worst = (m, k);
            }
        }
    }
    let c4 = c4_constant();
    Ok(LrBoundReport {
        q,
        n_max,
        c4,
        max_ratio,
        worst,
        pass: max_ratio <= c4,
    })
}

/// Monte-Carlo measurement of the anti-concentration floor: the chance that
/// the sample mean of `m` draws of `Bernoulli(1/2 + delta_gap)` still falls
/// strictly below 1/2, valid for `m <= delta_gap^-2 / 2`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AntiConcReport {
    pub delta_gap: f64,
    pub m: u64,
    pub trials: u64,
    pub frequency: f64,
    /// The measured frequency is itself an empirical lower-bound constant.
    pub implied_c3: f64,
    pub seed: u64,
}

pub fn anticoncentration_check(
    delta_gap: f64,
    m: u64,
    trials: u64,
    seed: u64,
) -> Result<AntiConcReport> {
    if !(0.0 < delta_gap && delta_gap < 0.5) {
        return Err(Error::domain("delta_gap must lie in (0, 1/2)"));
    }
    // relative slack so exact boundaries like delta = 0.05, m = 200 survive
    // the rounding in delta^2
    if (m as f64) > 0.5 / (delta_gap * delta_gap) * (1.0 + 1e-9) {
        return Err(Error::domain(format!(
            "m = {m} violates m <= delta^-2/2 = {}",
            0.5 / (delta_gap * delta_gap)
        )));
    }
    if trials == 0 {
        return Err(Error::domain("need at least one trial"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = 0.5 + delta_gap;
    let mut below = 0u64;
    for _ in 0..trials {
        let mut ones = 0u64;
        for _ in 0..m {
            if rng.random::<f64>() < p {
                ones += 1;
            }
        }
        if 2 * ones < m {
            below += 1;
        }
    }
    let frequency = below as f64 / trials as f64;
    Ok(AntiConcReport {
        delta_gap,
        m,
        trials,
        frequency,
        implied_c3: frequency,
        seed,
    })
}

/// Monte-Carlo check of the multiplicative Chernoff bound
/// `P(mean >= (1+eps) p) <= exp(-m eps^2 p / 3)` for `Bernoulli(p)` draws.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ChernoffReport {
    pub p: f64,
    pub m: u64,
    pub eps: f64,
    pub trials: u64,
    pub bound: f64,
    pub empirical_tail: f64,
    pub tail_se: f64,
    pub pass: bool,
    pub seed: u64,
}

pub fn chernoff_check(p: f64, m: u64, eps: f64, trials: u64, seed: u64) -> Result<ChernoffReport> {
    if !(0.0 < p && p < 1.0) {
        return Err(Error::domain("p must lie in (0,1)"));
    }
    if eps <= 0.0 {
        return Err(Error::domain("eps must be positive"));
    }
    if m == 0 || trials == 0 {
        return Err(Error::domain("m and trials must be positive"));
    }
    let bound = (-(m as f64) * eps * eps * p / 3.0).exp();
    let threshold = (1.0 + eps) * p;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hits = 0u64;
    for _ in 0..trials {
        let mut ones = 0u64;
        for _ in 0..m {
            if rng.random::<f64>() < p {
                ones += 1;
            }
        }
        if ones as f64 / m as f64 >= threshold {
            hits += 1;
        }
    }
    let tail = hits as f64 / trials as f64;
    let se = crate::util::proportion_se(tail, trials as usize);
    Ok(ChernoffReport {
        p,
        m,
        eps,
        trials,
        bound,
        empirical_tail: tail,
        tail_se: se,
        pass: tail <= bound + 3.0 * se,
        seed,
    })
}
