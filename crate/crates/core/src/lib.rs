//! Simulation library for nonparametric multi-class active learning.
//!
//! The crate provides, as composable pieces:
//!
//! - [`dyadic`]: dyadic partitions of the unit cube — the geometric substrate
//!   shared by every learner and distribution here.
//! - [`dist`]: analytic joint distributions `(P_X, eta)` with exact
//!   regression-function evaluation, label-query oracles, margin functions,
//!   and statistical checkers for the standard regularity conditions
//!   (Hölder smoothness, margin conditions, strong density).
//! - [`learner`]: the label-elimination active learners (a non-adaptive
//!   routine for known smoothness and a smoothness-adaptive meta routine),
//!   a passive plug-in baseline, and per-cell labeling rules.
//! - [`risk`]: exact and Monte-Carlo excess-risk evaluation, theoretical
//!   rate exponents, and log-log rate fitting.
//! - [`lowerbound`]: the randomized hard-instance ensemble (per-cell coin
//!   constructions), the conditional likelihood-ratio labeler, and numeric
//!   checks of the concentration facts the ensemble analysis leans on.
//! - [`harness`]: batch experiment orchestration with deterministic seeding,
//!   CSV/JSON persistence, and condition-report bundles.
//! - [`plot`]: standalone SVG log-log rate charts.
//!
//! Start from the `examples/` directory; each example exercises one of the
//! capabilities above end to end. A thin `margin-active` binary exposes the
//! same flows as `simulate`, `lowerbound`, `verify-dist`, and `plot`
//! subcommands driven by JSON config files.
//!
//! Everything is deterministic given a master seed: each run derives its own
//! RNG stream, and persisted artifacts are byte-stable across executions.

pub mod dist;
pub mod dyadic;
pub mod harness;
pub mod labels;
pub mod learner;
pub mod lowerbound;
pub mod plot;
pub mod risk;
pub(crate) mod util;

pub use labels::{Label, LabelSet};

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// A precondition on an operation's inputs was violated.
    #[error("domain error: {0}")]
    Domain(String),
    /// The query budget would be exceeded.
    #[error("budget exhausted: used {used} of {limit}")]
    BudgetExhausted { used: u64, limit: u64 },
    /// The operation needs analytic structure this distribution does not expose.
    #[error("unsupported spec: {0}")]
    UnsupportedSpec(String),
    /// Invalid experiment configuration; `path` points at the offending field.
    #[error("config error at `{path}`: {msg}")]
    Config { path: String, msg: String },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(path: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            msg: msg.into(),
        }
    }
}
