use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use fracpme::lab::{self, Check, RunConfig};
use fracpme::{Error, Result};

/// Spectral fractional operators and the regularized nonlocal
/// porous-medium solver, with estimate checks.
#[derive(Parser)]
#[command(name = "fracpme", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write its artifacts.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// output directory; overrides `[output] dir`
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the scenario for each (delta, mu) pair and report the limit trend.
    Continue {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        deltas: Vec<f64>,
        #[arg(long, value_delimiter = ',', required = true)]
        mus: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare finished runs that share grid and initial data.
    Compare {
        #[arg(required = true, num_args = 2..)]
        dirs: Vec<PathBuf>,
        /// JSON file for the comparison table
        #[arg(long)]
        out: PathBuf,
    },
    /// Certify the eigendecomposition and run the operator inequality suite.
    CheckOperators {
        #[arg(long)]
        config: PathBuf,
    },
}

fn load_config(path: &Path) -> Result<RunConfig> {
    let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    lab::parse_config(&text)
}

fn report(checks: &[Check]) -> bool {
    for c in checks {
        println!("{}", c.line());
    }
    let failed = checks.iter().filter(|c| !c.passed()).count();
    println!("{} checks, {failed} failed", checks.len());
    failed == 0
}

fn execute(cli: Cli) -> Result<bool> {
    let start = Instant::now();
    let passed = match cli.command {
        Command::Run { config, out } => {
            let cfg = load_config(&config)?;
            let dir = out.unwrap_or_else(|| PathBuf::from(&cfg.output.dir));
            let summary = lab::run_scenario(&cfg, &dir)?;
            report(&summary.checks)
        }
        Command::Continue { config, deltas, mus, out } => {
            let cfg = load_config(&config)?;
            let dir = out.unwrap_or_else(|| PathBuf::from(&cfg.output.dir));
            let outcome = lab::run_continuation(&cfg, &deltas, &mus, &dir)?;
            for p in &outcome.report.pairwise {
                println!(
                    "(delta, mu) {:?} -> {:?}: L2 difference {:.6e}",
                    p.from, p.to, p.l2_difference
                );
            }
            for l in &outcome.report.levels {
                println!("(delta, mu) ({}, {}): mass drift {:.6e}", l.delta, l.mu, l.terminal_mass_drift);
            }
            report(&outcome.checks)
        }
        Command::Compare { dirs, out } => {
            let table = lab::compare_runs(&dirs)?;
            let json = serde_json::to_string_pretty(&table)? + "\n";
            fs::write(&out, json).map_err(|e| Error::Config(format!("cannot write {}: {e}", out.display())))?;
            for p in &table.pairs {
                println!("{} -> {}: L2 difference {:.6e}", p.from, p.to, p.l2_difference);
            }
            true
        }
        Command::CheckOperators { config } => report(&lab::check_operators(&load_config(&config)?)?),
    };
    eprintln!("elapsed {:.2} s", start.elapsed().as_secs_f64());
    Ok(passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_config() || matches!(e, Error::Comparison(_)) {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
