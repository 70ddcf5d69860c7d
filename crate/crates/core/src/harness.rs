//! Batch experiment orchestration.
//!
//! Everything is driven by JSON configs (see `docs/config-schema.json` and
//! the `configs/` directory). A run grid is the cartesian product of
//! learners, budgets, and seeds; runs execute in parallel across a worker
//! pool, each on its own derived RNG stream, and results are order-
//! normalized before anything is written, so the persisted CSV is
//! byte-identical across executions of the same config.
//!
//! Timing is off by default for exactly that reason: with
//! `record_timings: true` the CSV carries wall-clock milliseconds and stops
//! being byte-reproducible.

use crate::dist::{Dist, DistConfig};
use crate::learner::{run_meta, run_nonadaptive_seeded, run_passive};
use crate::lowerbound::{run_ensemble, EnsembleLearner, EnsembleResult};
use crate::plot::RateSeries;
use crate::risk::{excess_risk_exact, excess_risk_mc, fit_rate, RateFit};
use crate::util::derive_seed;
use crate::{Error, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

/// Environment variable that overrides the config's master seed.
pub const SEED_ENV_VAR: &str = "MARGIN_ACTIVE_SEED";

/// Pinned rate-table CSV header.
pub const CSV_HEADER: &str = "learner,spec,n,seed,risk,risk_se,queries_used,r_min,wall_ms";

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum LearnerConfig {
    Meta {
        delta: f64,
        lambda: f64,
    },
    Nonadaptive {
        delta0: f64,
        alpha: f64,
        lambda: f64,
        #[serde(default)]
        r0_level: Option<u32>,
    },
    Passive {
        alpha: f64,
        #[serde(default)]
        level: Option<u32>,
    },
}

impl LearnerConfig {
    pub fn id(&self) -> &'static str {
        match self {
            LearnerConfig::Meta { .. } => "meta",
            LearnerConfig::Nonadaptive { .. } => "nonadaptive",
            LearnerConfig::Passive { .. } => "passive",
        }
    }

    fn validate(&self, path: &str) -> Result<()> {
        match self {
            LearnerConfig::Meta { delta, lambda } => {
                if !(0.0 < *delta && *delta < 1.0) {
                    return Err(Error::config(format!("{path}.delta"), "must lie in (0,1)"));
                }
                if *lambda <= 0.0 {
                    return Err(Error::config(format!("{path}.lambda"), "must be positive"));
                }
            }
            LearnerConfig::Nonadaptive {
                delta0,
                alpha,
                lambda,
                ..
            } => {
                if !(0.0 < *delta0 && *delta0 < 1.0) {
                    return Err(Error::config(format!("{path}.delta0"), "must lie in (0,1)"));
                }
                if !(0.0 < *alpha && *alpha <= 1.0) {
                    return Err(Error::config(format!("{path}.alpha"), "must lie in (0,1]"));
                }
                if *lambda <= 0.0 {
                    return Err(Error::config(format!("{path}.lambda"), "must be positive"));
                }
            }
            LearnerConfig::Passive { alpha, .. } => {
                if !(0.0 < *alpha && *alpha <= 1.0) {
                    return Err(Error::config(format!("{path}.alpha"), "must lie in (0,1]"));
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "method", rename_all = "kebab-case", deny_unknown_fields)]
pub enum EvalConfig {
    Exact,
    MonteCarlo { points: u64 },
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig::Exact
    }
}

/// A rate experiment: one spec, a learner list, a budget grid, seeds.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub id: String,
    #[serde(default)]
    pub master_seed: u64,
    pub spec: DistConfig,
    pub learners: Vec<LearnerConfig>,
    pub budgets: Vec<u64>,
    #[serde(default)]
    pub seeds: Option<Vec<u64>>,
    #[serde(default)]
    pub seed_count: Option<u64>,
    #[serde(default)]
    pub evaluation: EvalConfig,
    #[serde(default)]
    pub record_timings: bool,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.learners.is_empty() {
            return Err(Error::config("learners", "must not be empty"));
        }
        for (i, l) in self.learners.iter().enumerate() {
            l.validate(&format!("learners[{i}]"))?;
        }
        if self.budgets.is_empty() {
            return Err(Error::config("budgets", "must not be empty"));
        }
        if self.budgets.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::config("budgets", "must be strictly increasing"));
        }
        let seeds = self.resolve_seeds()?;
        let mut sorted = seeds.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != seeds.len() {
            return Err(Error::config("seeds", "must be distinct"));
        }
        if let EvalConfig::MonteCarlo { points } = self.evaluation {
            if points == 0 {
                return Err(Error::config("evaluation.points", "must be positive"));
            }
        }
        Ok(())
    }

    pub fn resolve_seeds(&self) -> Result<Vec<u64>> {
        match (&self.seeds, self.seed_count) {
            (Some(s), _) if !s.is_empty() => Ok(s.clone()),
            (_, Some(k)) if k > 0 => Ok((0..k).collect()),
            _ => Err(Error::config(
                "seeds",
                "provide a nonempty `seeds` list or a positive `seed_count`",
            )),
        }
    }

    /// Stable hex digest of the canonical JSON form (FNV-1a).
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in bytes {
            h ^= b as u64;
            h = h.wrapping_mul(0x1000_0000_01b3);
        }
        format!("{h:016x}")
    }
}

/// One completed run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunRecord {
    pub config_hash: String,
    pub learner: String,
    pub spec: String,
    pub n: u64,
    pub seed: u64,
    pub risk: f64,
    pub risk_se: Option<f64>,
    pub queries_used: u64,
    pub r_min: Option<f64>,
    pub wall_ms: u64,
}

/// Per-(learner, spec) rate fit over the per-budget mean risks.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FitRow {
    pub learner: String,
    pub spec: String,
    pub fit: Option<RateFit>,
    pub note: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentOutput {
    pub config_hash: String,
    pub records: Vec<RunRecord>,
    pub fits: Vec<FitRow>,
}

fn run_one(
    cfg: &ExperimentConfig,
    dist: &dyn Dist,
    learner: &LearnerConfig,
    learner_idx: u64,
    n: u64,
    seed: u64,
    mc_override: Option<u64>,
    config_hash: &str,
) -> Result<RunRecord> {
    let stream = derive_seed(cfg.master_seed, &[learner_idx, n, seed]);
    let t0 = Instant::now();
    let (map, used, r_min) = match learner {
        LearnerConfig::Meta { delta, lambda } => {
            let run = run_meta(dist, n, *delta, *lambda, None, stream)?;
            let r0 = 0.5f64.powi(run.r0_level as i32);
            (run.map, run.queries_used, Some(r0))
        }
        LearnerConfig::Nonadaptive {
            delta0,
            alpha,
            lambda,
            r0_level,
        } => {
            let trace = run_nonadaptive_seeded(dist, n, *delta0, *alpha, *lambda, *r0_level, stream)?;
            let rm = trace.r_min();
            (trace.map, trace.queries_used, Some(rm))
        }
        LearnerConfig::Passive { alpha, level } => {
            let (map, used) = run_passive(dist, n, *level, *alpha, stream)?;
            let rl = 0.5f64.powi(map.level() as i32);
            (map, used, Some(rl))
        }
    };
    let (risk, risk_se) = match cfg.evaluation {
        EvalConfig::Exact => (excess_risk_exact(&map, dist)?.value, None),
        EvalConfig::MonteCarlo { points } => {
            let m = mc_override.unwrap_or(points);
            let est = excess_risk_mc(&map, dist, m, derive_seed(stream, &[0xE7A1]))?;
            (est.value, est.standard_error)
        }
    };
    let wall_ms = if cfg.record_timings {
        t0.elapsed().as_millis() as u64
    } else {
        0
    };
    Ok(RunRecord {
        config_hash: config_hash.to_string(),
        learner: learner.id().to_string(),
        spec: dist.id().to_string(),
        n,
        seed,
        risk,
        risk_se,
        queries_used: used,
        r_min,
        wall_ms,
    })
}

/// Executes the full grid. `jobs = 0` uses the default worker count.
pub fn run_experiment(
    cfg: &ExperimentConfig,
    jobs: usize,
    mc_override: Option<u64>,
) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let dist: Arc<dyn Dist> = cfg.spec.build()?;
    let seeds = cfg.resolve_seeds()?;
    let config_hash = cfg.hash();
    let mut tasks = Vec::new();
    for (li, learner) in cfg.learners.iter().enumerate() {
        for &n in &cfg.budgets {
            for &seed in &seeds {
                tasks.push((li as u64, learner.clone(), n, seed));
            }
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::domain(format!("worker pool: {e}")))?;
    let mut records = pool.install(|| {
        tasks
            .par_iter()
            .map(|(li, learner, n, seed)| {
                run_one(cfg, dist.as_ref(), learner, *li, *n, *seed, mc_override, &config_hash)
            })
            .collect::<Result<Vec<_>>>()
    })?;
    records.sort_by(|a, b| {
        (&a.learner, &a.spec, a.n, a.seed).cmp(&(&b.learner, &b.spec, b.n, b.seed))
    });

    // rate fit per learner over per-budget mean risks
    let mut fits = Vec::new();
    for learner in &cfg.learners {
        let id = learner.id();
        let mut pts = Vec::new();
        for &n in &cfg.budgets {
            let risks: Vec<f64> = records
                .iter()
                .filter(|r| r.learner == id && r.n == n)
                .map(|r| r.risk)
                .collect();
            if !risks.is_empty() {
                pts.push((n as f64, risks.iter().sum::<f64>() / risks.len() as f64));
            }
        }
        let (fit, note) = match fit_rate(&pts) {
            Ok(f) => (Some(f), String::new()),
            Err(e) => (None, e.to_string()),
        };
        fits.push(FitRow {
            learner: id.to_string(),
            spec: dist.id().to_string(),
            fit,
            note,
        });
    }
    Ok(ExperimentOutput {
        config_hash,
        records,
        fits,
    })
}

fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

/// Renders records as the pinned CSV.
pub fn records_to_csv(records: &[RunRecord]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.learner,
            r.spec,
            r.n,
            r.seed,
            fmt_f64(r.risk),
            r.risk_se.map(fmt_f64).unwrap_or_default(),
            r.queries_used,
            r.r_min.map(fmt_f64).unwrap_or_default(),
            r.wall_ms
        );
    }
    out
}

/// Writes `records.csv`, `fits.json`, and the output summary into `out_dir`.
pub fn write_experiment_output(out: &ExperimentOutput, out_dir: &Path) -> Result<()> {
    std::fs::create_dir_all(out_dir)?;
    std::fs::write(out_dir.join("records.csv"), records_to_csv(&out.records))?;
    std::fs::write(
        out_dir.join("fits.json"),
        serde_json::to_string_pretty(&out.fits)?,
    )?;
    Ok(())
}

/// Groups records into per-learner mean-risk series for plotting.
pub fn rate_series(records: &[RunRecord]) -> Vec<RateSeries> {
    let mut learners: Vec<String> = records.iter().map(|r| r.learner.clone()).collect();
    learners.sort();
    learners.dedup();
    learners
        .into_iter()
        .map(|id| {
            let mut ns: Vec<u64> = records
                .iter()
                .filter(|r| r.learner == id)
                .map(|r| r.n)
                .collect();
            ns.sort_unstable();
            ns.dedup();
            let points = ns
                .into_iter()
                .map(|n| {
                    let risks: Vec<f64> = records
                        .iter()
                        .filter(|r| r.learner == id && r.n == n)
                        .map(|r| r.risk)
                        .collect();
                    (n as f64, risks.iter().sum::<f64>() / risks.len() as f64)
                })
                .collect();
            RateSeries {
                learner: id,
                points,
            }
        })
        .collect()
}

/// Reads a `records.csv` back into run records (for the plot subcommand).
pub fn read_records_csv(path: &Path) -> Result<Vec<RunRecord>> {
    let mut rdr = csv::ReaderBuilder::new().from_path(path)?;
    let mut out = Vec::new();
    for row in rdr.records() {
        let row = row?;
        let get = |i: usize| row.get(i).unwrap_or("").to_string();
        let parse_f = |s: String| -> Option<f64> {
            if s.is_empty() {
                None
            } else {
                s.parse().ok()
            }
        };
        out.push(RunRecord {
            config_hash: String::new(),
            learner: get(0),
            spec: get(1),
            n: get(2).parse().map_err(|_| Error::domain("bad n column"))?,
            seed: get(3).parse().map_err(|_| Error::domain("bad seed column"))?,
            risk: get(4).parse().map_err(|_| Error::domain("bad risk column"))?,
            risk_se: parse_f(get(5)),
            queries_used: get(6)
                .parse()
                .map_err(|_| Error::domain("bad queries_used column"))?,
            r_min: parse_f(get(7)),
            wall_ms: get(8).parse().unwrap_or(0),
        });
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Lower-bound ensemble experiments
// ---------------------------------------------------------------------------

/// Config for the ensemble study: a budget grid, a draw count, and learners.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct LowerBoundExpConfig {
    pub id: String,
    #[serde(default)]
    pub master_seed: u64,
    pub alpha: f64,
    pub beta: f64,
    pub lambda: f64,
    pub dimension: usize,
    pub budgets: Vec<u64>,
    pub draws: u64,
    pub learners: Vec<EnsembleLearner>,
}

impl LowerBoundExpConfig {
    pub fn validate(&self) -> Result<()> {
        if self.budgets.is_empty() || self.budgets.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::config("budgets", "must be nonempty, strictly increasing"));
        }
        if self.draws == 0 {
            return Err(Error::config("draws", "must be positive"));
        }
        if self.learners.is_empty() {
            return Err(Error::config("learners", "must not be empty"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LowerBoundExpOutput {
    pub results: Vec<EnsembleResult>,
    pub fits: Vec<FitRow>,
}

/// Runs the ensemble at every budget (parallel over budgets) and fits each
/// learner's ensemble-mean risk against the budget grid.
pub fn run_lowerbound_experiment(
    cfg: &LowerBoundExpConfig,
    jobs: usize,
) -> Result<LowerBoundExpOutput> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::domain(format!("worker pool: {e}")))?;
    let results = pool.install(|| {
        cfg.budgets
            .par_iter()
            .map(|&n| {
                run_ensemble(
                    n,
                    cfg.alpha,
                    cfg.beta,
                    cfg.lambda,
                    cfg.dimension,
                    &cfg.learners,
                    cfg.draws,
                    cfg.master_seed,
                )
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let mut fits = Vec::new();
    for learner in &cfg.learners {
        let id = learner.id();
        let pts: Vec<(f64, f64)> = results
            .iter()
            .map(|res| {
                let le = res
                    .learners
                    .iter()
                    .find(|l| l.id == id)
                    .expect("learner present in every result");
                (res.n as f64, le.mean)
            })
            .collect();
        let (fit, note) = match fit_rate(&pts) {
            Ok(f) => (Some(f), String::new()),
            Err(e) => (None, e.to_string()),
        };
        fits.push(FitRow {
            learner: id,
            spec: "lower-bound-ensemble".into(),
            fit,
            note,
        });
    }
    Ok(LowerBoundExpOutput { results, fits })
}

/// Writes `ensemble.json`, the per-draw CSV, and `fits.json`.
pub fn write_lowerbound_output(out: &LowerBoundExpOutput, out_dir: &Path) -> Result<()> {
    std::fs::create_dir_all(out_dir)?;
    std::fs::write(
        out_dir.join("ensemble.json"),
        serde_json::to_string_pretty(&out.results)?,
    )?;
    let mut csv = String::from("draw,learner,n,risk\n");
    for res in &out.results {
        for le in &res.learners {
            for (draw, risk) in le.risks.iter().enumerate() {
                let _ = writeln!(csv, "{draw},{},{},{}", le.id, res.n, fmt_f64(*risk));
            }
        }
    }
    std::fs::write(out_dir.join("perdraw.csv"), csv)?;
    std::fs::write(
        out_dir.join("fits.json"),
        serde_json::to_string_pretty(&out.fits)?,
    )?;
    Ok(())
}

/// Mean-risk series per learner from ensemble results, for plotting.
pub fn ensemble_series(results: &[EnsembleResult]) -> Vec<RateSeries> {
    let mut ids: Vec<String> = results
        .iter()
        .flat_map(|r| r.learners.iter().map(|l| l.id.clone()))
        .collect();
    ids.sort();
    ids.dedup();
    ids.into_iter()
        .map(|id| RateSeries {
            points: results
                .iter()
                .filter_map(|r| {
                    r.learners
                        .iter()
                        .find(|l| l.id == id)
                        .map(|l| (r.n as f64, l.mean))
                })
                .collect(),
            learner: id,
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Distribution verification bundles
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct HolderCheckConfig {
    pub lambda: f64,
    pub alpha: f64,
    #[serde(default = "default_grid_n")]
    pub grid_n: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct TmcCheckConfig {
    pub beta: f64,
    pub c_beta: f64,
    pub taus: Vec<f64>,
    #[serde(default = "default_mc_n")]
    pub mc_n: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RmcCheckConfig {
    pub epsilon: f64,
    pub beta: f64,
    pub beta_prime: f64,
    pub c_beta: f64,
    pub taus: Vec<f64>,
    #[serde(default = "default_mc_n")]
    pub mc_n: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct StrongDensityCheckConfig {
    pub c_d: f64,
    pub max_level: u32,
    #[serde(default = "default_mc_n")]
    pub mc_n: usize,
}

fn default_grid_n() -> usize {
    1000
}

fn default_mc_n() -> usize {
    100_000
}

#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ChecksConfig {
    #[serde(default)]
    pub holder: Option<HolderCheckConfig>,
    #[serde(default)]
    pub tmc: Option<TmcCheckConfig>,
    #[serde(default)]
    pub rmc: Option<RmcCheckConfig>,
    #[serde(default)]
    pub strong_density: Option<StrongDensityCheckConfig>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    pub id: String,
    #[serde(default)]
    pub master_seed: u64,
    pub spec: DistConfig,
    pub checks: ChecksConfig,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VerifyBundle {
    pub spec: String,
    pub pass: bool,
    pub reports: Vec<crate::dist::ConditionReport>,
}

/// Runs the configured checkers against the spec; `pass` is their
/// conjunction.
pub fn verify_dist(cfg: &VerifyConfig) -> Result<VerifyBundle> {
    let dist = cfg.spec.build()?;
    let mut reports = Vec::new();
    let seed = cfg.master_seed;
    if let Some(h) = &cfg.checks.holder {
        reports.push(crate::dist::check_holder(
            dist.as_ref(),
            h.lambda,
            h.alpha,
            h.grid_n,
            derive_seed(seed, &[1]),
        )?);
    }
    if let Some(t) = &cfg.checks.tmc {
        reports.push(crate::dist::check_tmc(
            dist.as_ref(),
            t.beta,
            t.c_beta,
            &t.taus,
            t.mc_n,
            derive_seed(seed, &[2]),
        )?);
    }
    if let Some(r) = &cfg.checks.rmc {
        reports.push(crate::dist::check_rmc(
            dist.as_ref(),
            r.epsilon,
            r.beta,
            r.beta_prime,
            r.c_beta,
            &r.taus,
            r.mc_n,
            derive_seed(seed, &[3]),
        )?);
    }
    if let Some(s) = &cfg.checks.strong_density {
        reports.push(crate::dist::check_strong_density(
            dist.as_ref(),
            s.c_d,
            s.max_level,
            s.mc_n,
            derive_seed(seed, &[4]),
        )?);
    }
    if reports.is_empty() {
        return Err(Error::config("checks", "no checks requested"));
    }
    Ok(VerifyBundle {
        spec: dist.id().to_string(),
        pass: reports.iter().all(|r| r.pass),
        reports,
    })
}
