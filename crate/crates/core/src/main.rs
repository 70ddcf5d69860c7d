//! Thin command-line front end over the library harness.

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use margin_active::harness::{
    self, ensemble_series, rate_series, ExperimentConfig, LowerBoundExpConfig, VerifyConfig,
    SEED_ENV_VAR,
};
use margin_active::plot::emit_plot;
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "margin-active",
    about = "Active-learning rate experiments on analytic distributions",
    version
)]
struct Cli {
    /// Master seed; overrides the config and the MARGIN_ACTIVE_SEED env var.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Parallel worker count (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    /// Override Monte-Carlo evaluation points.
    #[arg(long, global = true)]
    mc_points: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a rate experiment from a JSON config; writes records.csv + fits.json.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Also write rates.svg next to the records.
        #[arg(long, default_value_t = false)]
        plot: bool,
    },
    /// Run the hard-instance ensemble study from a JSON config.
    Lowerbound {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = false)]
        plot: bool,
    },
    /// Run distribution condition checks; exit status reflects pass/fail.
    VerifyDist {
        #[arg(long)]
        config: PathBuf,
    },
    /// Render a log-log SVG chart from an existing records.csv.
    Plot {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "rates.svg")]
        output: PathBuf,
    },
}

fn resolved_seed(cli_seed: Option<u64>, config_seed: u64) -> Result<u64> {
    if let Some(s) = cli_seed {
        return Ok(s);
    }
    if let Ok(v) = std::env::var(SEED_ENV_VAR) {
        return v
            .parse()
            .with_context(|| format!("{SEED_ENV_VAR} must be a u64, got `{v}`"));
    }
    Ok(config_seed)
}

fn load_json<T: serde::de::DeserializeOwned>(path: &PathBuf) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match &cli.command {
        Command::Simulate { config, plot } => {
            let mut cfg: ExperimentConfig = load_json(config)?;
            cfg.master_seed = resolved_seed(cli.seed, cfg.master_seed)?;
            let out = harness::run_experiment(&cfg, cli.jobs, cli.mc_points)?;
            harness::write_experiment_output(&out, &cli.out)?;
            for fit in &out.fits {
                match &fit.fit {
                    Some(f) => eprintln!(
                        "{} on {}: slope {:.4} (residual se {:.4}, {} pts, {} zero-risk dropped)",
                        fit.learner,
                        fit.spec,
                        f.slope,
                        f.residual_se,
                        f.points.len(),
                        f.dropped_zero_risk
                    ),
                    None => eprintln!("{} on {}: no fit ({})", fit.learner, fit.spec, fit.note),
                }
            }
            if *plot {
                emit_plot(&rate_series(&out.records), &cli.out.join("rates.svg"))?;
            }
            eprintln!(
                "wrote {} records to {}",
                out.records.len(),
                cli.out.display()
            );
        }
        Command::Lowerbound { config, plot } => {
            let mut cfg: LowerBoundExpConfig = load_json(config)?;
            cfg.master_seed = resolved_seed(cli.seed, cfg.master_seed)?;
            let out = harness::run_lowerbound_experiment(&cfg, cli.jobs)?;
            harness::write_lowerbound_output(&out, &cli.out)?;
            for fit in &out.fits {
                match &fit.fit {
                    Some(f) => eprintln!("{}: ensemble slope {:.4}", fit.learner, f.slope),
                    None => eprintln!("{}: no fit ({})", fit.learner, fit.note),
                }
            }
            if *plot {
                emit_plot(&ensemble_series(&out.results), &cli.out.join("rates.svg"))?;
            }
            eprintln!("wrote ensemble results to {}", cli.out.display());
        }
        Command::VerifyDist { config } => {
            let mut cfg: VerifyConfig = load_json(config)?;
            cfg.master_seed = resolved_seed(cli.seed, cfg.master_seed)?;
            let bundle = harness::verify_dist(&cfg)?;
            std::fs::create_dir_all(&cli.out)?;
            let path = cli.out.join("conditions.json");
            std::fs::write(&path, serde_json::to_string_pretty(&bundle)?)?;
            for rep in &bundle.reports {
                eprintln!(
                    "{}: {} (constant {:.4})",
                    rep.condition,
                    if rep.pass { "pass" } else { "FAIL" },
                    rep.measured_constant
                );
            }
            eprintln!("wrote {}", path.display());
            if !bundle.pass {
                bail!("one or more condition checks failed");
            }
        }
        Command::Plot { input, output } => {
            let records = harness::read_records_csv(input)?;
            let series = rate_series(&records);
            emit_plot(&series, output)?;
            eprintln!("wrote {}", output.display());
        }
    }
    Ok(())
}
