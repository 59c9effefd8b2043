//! Command-line front end: constructions, bound verification, node
//! solving, summary tables, and plot-data export over the shared JSON and
//! CSV formats. Data goes to stdout, diagnostics to stderr; identical
//! invocations produce byte-identical files.

mod commands;
mod logger;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "monorat",
    version,
    about = "Monotone rational functions on [-1, 1]: derivative bounds, \
             extremal constructions, interpolation nodes",
    after_help = "Set MONORAT_LOG to error, warn, info or debug to control \
                  stderr diagnostics."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a near-extremal odd increasing function of degree 2n-1 whose
    /// slope-to-norm ratio approaches 9^(n-1).
    Construct {
        /// Number of stages; degree class is 2n-1.
        #[arg(long)]
        n: usize,
        /// Relative slope-loss policy per stage, in (0, 0.5).
        #[arg(long, default_value_t = 0.01)]
        rho: f64,
        /// Output path for the function JSON; the construction report goes
        /// next to it as `<out>.report.json`.
        #[arg(long)]
        out: PathBuf,
        /// Optional CSV of per-stage parameters.
        #[arg(long)]
        stages_csv: Option<PathBuf>,
    },
    /// Certify a function file as increasing and verify its derivative
    /// bounds in degree class Q_n.
    Verify {
        /// Function JSON path.
        #[arg(long)]
        input: PathBuf,
        /// Degree-class budget n.
        #[arg(long)]
        n: usize,
    },
    /// Solve the interpolation-node system for the built-in steep target
    /// f_delta and export thresholds, nodes and residuals as CSV.
    Nodes {
        /// System size.
        #[arg(long)]
        n: usize,
        /// Target steepness; the pipeline needs (1+delta)/delta > 9^n/2.
        #[arg(long)]
        delta: f64,
        /// CSV output path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Print achieved ratios against the 9^(n-1) .. 9^n/2 sandwich for
    /// n = 1..max-n.
    Table {
        #[arg(long)]
        max_n: usize,
        #[arg(long, default_value_t = 0.01)]
        rho: f64,
        /// Optional CSV export of the table.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Sample a function file on an endpoint-excluded grid: CSV of x,
    /// value, derivative, and the envelope 9^n * norm / (1 - x^2).
    Sample {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 1001)]
        points: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    logger::init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{e}");
                    ExitCode::from(commands::EXIT_OK as u8)
                }
                _ => {
                    eprint!("{e}");
                    ExitCode::from(commands::EXIT_USAGE as u8)
                }
            };
        }
    };
    let code = match cli.command {
        Command::Construct {
            n,
            rho,
            out,
            stages_csv,
        } => commands::cmd_construct(n, rho, &out, stages_csv.as_ref()),
        Command::Verify { input, n } => commands::cmd_verify(&input, n),
        Command::Nodes { n, delta, out } => commands::cmd_nodes(n, delta, &out),
        Command::Table { max_n, rho, csv } => commands::cmd_table(max_n, rho, csv.as_ref()),
        Command::Sample { input, points, out } => commands::cmd_sample(&input, points, &out),
    };
    ExitCode::from(code as u8)
}
