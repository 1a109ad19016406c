//! `qhyp`: type II error curves and oracle cross-checks from the command line.

mod config;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use qhyp::verify::{run_suite, Suite};
use qhyp::ErrorCurve;

use config::{ExperimentConfig, PartialConfig};

#[derive(Debug, Parser)]
#[command(
    name = "qhyp",
    version,
    about = "Displacement tests for squeezed Gaussian states"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write the SI and HH type II error curves as CSV.
    Figure(Box<FigureArgs>),
    /// Run an oracle cross-check suite and report every residual.
    Verify {
        #[arg(value_parser = parse_suite, value_name = "fock|distributions|tests|all")]
        suite: Suite,
    },
}

#[derive(Debug, Args)]
struct FigureArgs {
    /// Experiment file in TOML; its keys mirror the long flags.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Let the config file override flags instead of the reverse.
    #[arg(long, requires = "config")]
    config_wins: bool,
    /// Number of modes.
    #[arg(long)]
    m: Option<usize>,
    /// Number of copies.
    #[arg(long)]
    n: Option<usize>,
    /// Thermal photon number.
    #[arg(long = "N", value_name = "N")]
    mixture: Option<f64>,
    /// Level of the tests (probability of rejecting a true null).
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    theta_min: Option<f64>,
    #[arg(long)]
    theta_max: Option<f64>,
    /// Number of grid points, endpoints included.
    #[arg(long)]
    theta_steps: Option<usize>,
    /// HH column: zero, L-real-theta, L-imag-theta or a squeezing file. Repeatable.
    #[arg(long)]
    eta: Vec<String>,
    /// Monte Carlo replicates per point and column (0 = analytic only).
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output CSV path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl FigureArgs {
    fn flags(&self) -> PartialConfig {
        PartialConfig {
            m: self.m,
            n: self.n,
            mixture: self.mixture,
            alpha: self.alpha,
            theta_min: self.theta_min,
            theta_max: self.theta_max,
            theta_steps: self.theta_steps,
            eta: (!self.eta.is_empty()).then(|| self.eta.clone()),
            reps: self.reps,
            seed: self.seed,
            out: self.out.clone(),
        }
    }

    fn resolve(&self) -> Result<ExperimentConfig> {
        let flags = self.flags();
        let merged = match &self.config {
            None => flags,
            Some(path) => {
                let file = PartialConfig::from_file(path)?;
                if self.config_wins {
                    file.over(flags)
                } else {
                    flags.over(file)
                }
            }
        };
        Ok(ExperimentConfig::resolve(merged))
    }
}

fn parse_suite(s: &str) -> Result<Suite, String> {
    s.parse()
        .map_err(|_| format!("expected one of {}", Suite::NAMES.join(", ")))
}

fn run_figure(args: &FigureArgs) -> Result<()> {
    let cfg = args.resolve()?;
    let spec = cfg.curve_spec()?;
    log::info!(
        "{} grid points, {} HH columns",
        spec.theta_grid.len(),
        spec.columns.len()
    );
    let curve = ErrorCurve::compute(spec)?;
    let csv = curve.to_csv(&cfg.echo());
    match &cfg.out {
        Some(path) => {
            std::fs::write(path, csv).with_context(|| format!("writing {}", path.display()))?
        }
        None => std::io::stdout().lock().write_all(csv.as_bytes())?,
    }
    Ok(())
}

fn run_verify(suite: Suite) -> bool {
    let results = run_suite(suite);
    let failed = results.iter().filter(|r| r.failed()).count();
    let skipped = results
        .iter()
        .filter(|r| matches!(r.outcome, qhyp::verify::Outcome::Skipped(_)))
        .count();
    for r in &results {
        println!("{r}");
    }
    println!(
        "{} checks: {} passed, {failed} failed, {skipped} skipped",
        results.len(),
        results.len() - failed - skipped
    );
    failed == 0
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match cli.command {
        Command::Figure(args) => match run_figure(&args) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: {e:#}");
                ExitCode::FAILURE
            }
        },
        Command::Verify { suite } => {
            if run_verify(suite) {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
