//! `safectl`: generate scenarios, run and sweep safe controllers, emit
//! phase portraits and compare hybrid scores.
//!
//! Exit codes: 0 on success, 1 on a usage or configuration error, 2 on a
//! runtime failure (I/O, or an episode of `run` aborted by a numerical
//! blowup).

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::Overrides;

#[derive(Debug, Parser)]
#[command(name = "safectl", version, about = "Energy-function safe control benchmark")]
struct Cli {
    /// TOML file with default settings; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a deterministic scenario set as JSON.
    GenScenarios {
        #[command(flatten)]
        settings: Overrides,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run every scenario once per algorithm and write one CSV row per episode.
    Run {
        #[command(flatten)]
        settings: Overrides,
        /// Scenario file; generated from --seed/--count when absent.
        #[arg(long)]
        scenarios: Option<PathBuf>,
        /// Results CSV; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write every frame as JSON lines.
        #[arg(long)]
        trajectories: Option<PathBuf>,
    },
    /// Sweep d_min, k and the algorithm parameter; write points and frontier CSVs.
    Sweep {
        #[command(flatten)]
        settings: Overrides,
        #[arg(long)]
        scenarios: Option<PathBuf>,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        /// Comma-separated d_min values.
        #[arg(long, value_delimiter = ',')]
        dmin_grid: Option<Vec<f64>>,
        /// Comma-separated k values.
        #[arg(long, value_delimiter = ',')]
        k_grid: Option<Vec<f64>>,
        /// Comma-separated values of the algorithm parameter.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        param_grid: Option<Vec<f64>>,
    },
    /// Evaluate the controller over a grid of ball positions.
    Phase {
        #[command(flatten)]
        settings: Overrides,
        /// Grid size as NXxNY. Cells landing exactly on the obstacle are skipped.
        #[arg(long, default_value = "40x40")]
        resolution: String,
        #[arg(long, allow_hyphen_values = true, default_value = "-3,3")]
        x_range: Pair,
        #[arg(long, allow_hyphen_values = true, default_value = "-3,3")]
        y_range: Pair,
        /// Ball velocity at every cell.
        #[arg(long, allow_hyphen_values = true, default_value = "1,0")]
        velocity: Pair,
        #[arg(long, allow_hyphen_values = true, default_value = "0,0")]
        obstacle: Pair,
        /// Goal of the PD reference.
        #[arg(long, allow_hyphen_values = true, default_value = "4,0")]
        goal: Pair,
        /// Constant reference control; replaces the PD reference.
        #[arg(long, allow_hyphen_values = true)]
        u0: Option<Pair>,
        /// Grid CSV; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Default sweeps for all five algorithms; prints the hybrid-score table.
    Compare {
        #[command(flatten)]
        settings: Overrides,
        #[arg(long)]
        scenarios: Option<PathBuf>,
        /// Also write the table as CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Two comma-separated numbers, e.g. `-3,3`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pair(pub [f64; 2]);

impl std::str::FromStr for Pair {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (a, b) = s.split_once(',').ok_or_else(|| format!("expected `a,b`, got `{s}`"))?;
        let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("`{t}`: {e}"));
        Ok(Pair([num(a)?, num(b)?]))
    }
}

/// Failure classes, mapped to exit codes 1 and 2.
#[derive(Debug)]
pub enum Failure {
    Usage(anyhow::Error),
    Runtime(anyhow::Error),
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Runtime(_) => 2,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match commands::dispatch(cli.config.as_deref(), cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (Failure::Usage(e) | Failure::Runtime(e)) = &f;
            eprintln!("error: {e:#}");
            ExitCode::from(f.exit_code())
        }
    }
}
