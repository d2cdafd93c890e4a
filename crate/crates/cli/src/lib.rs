//! Command-line front end: evaluate risk measures, solve sharing problems,
//! run the market-data pipeline and the oracle suite.
//!
//! Exit codes: 0 success, 1 numerical failure, 2 configuration or
//! validation error, 3 oracle mismatch, 4 sharing value is `-inf`.

pub mod commands;
pub mod problem;

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use choquet_core::infconv::DEFAULT_NODE_BUDGET;
use choquet_core::oracle::{OracleOptions, DEFAULT_ORACLE_CASES};
use choquet_core::{Error, ShareOptions};

use commands::{cmd_eval, cmd_oracle, cmd_pipeline, cmd_share, ShareArgs};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitCode {
    Ok = 0,
    Numeric = 1,
    Config = 2,
    OracleMismatch = 3,
    NegativeInfinity = 4,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Atomless,
    Discrete,
}

#[derive(Debug, Parser)]
#[command(name = "choquet", version, about = "Choquet risk measures and risk sharing")]
pub struct Cli {
    /// Directory for JSON and CSV artifacts.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// VaR and ES of one random variable under one capacity.
    Eval {
        #[arg(long)]
        config: PathBuf,
    },
    /// Optimal sharing of X among VaR agents.
    Share {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::Discrete)]
        mode: Mode,
        /// Check the value against the exhaustive oracle on small instances.
        #[arg(long)]
        oracle: bool,
        /// Also solve in the other mode and check discrete >= atomless.
        #[arg(long)]
        paired: bool,
        /// Use allocations `(X - y) 1_{A_i} + y/n` with this `y`.
        #[arg(long, allow_negative_numbers = true)]
        y_shift: Option<f64>,
        /// Rearrange the tail so the first agent takes the largest losses.
        #[arg(long)]
        tail_rearrange: bool,
        /// Test every threshold instead of bisecting.
        #[arg(long)]
        linear_scan: bool,
        #[arg(long, default_value_t = DEFAULT_NODE_BUDGET)]
        node_budget: u64,
    },
    /// Build agents from a price CSV and report risk before and after sharing.
    Pipeline {
        #[arg(long)]
        config: PathBuf,
        /// Price or return CSV.
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        node_budget: Option<u64>,
    },
    /// Cross-check the solvers against independent computations.
    Oracle {
        #[arg(long, default_value_t = DEFAULT_ORACLE_CASES)]
        cases: usize,
        #[arg(long, hide = true)]
        perturb: bool,
    },
}

pub fn error_code(e: &Error) -> ExitCode {
    match e {
        Error::NumericBreakdown(_) | Error::SearchBudgetExceeded(_) => ExitCode::Numeric,
        _ => ExitCode::Config,
    }
}

/// Runs a parsed command, printing to `stdout` and `stderr`.
pub fn run(cli: Cli, stdout: &mut impl Write, stderr: &mut impl Write) -> ExitCode {
    let out = commands::out_dir(&cli.out);
    let result = match cli.command {
        Command::Eval { config } => cmd_eval(&config, out),
        Command::Share {
            config,
            mode,
            oracle,
            paired,
            y_shift,
            tail_rearrange,
            linear_scan,
            node_budget,
        } => {
            let args = ShareArgs {
                mode,
                oracle,
                paired,
                tail_rearrange,
                options: ShareOptions {
                    node_budget,
                    linear_scan,
                    y_shift,
                    allow_gap: false,
                },
            };
            cmd_share(&config, out, args)
        }
        Command::Pipeline {
            config,
            input,
            node_budget,
        } => cmd_pipeline(&config, &input, out, node_budget),
        Command::Oracle { cases, perturb } => cmd_oracle(
            OracleOptions {
                seed: cli.seed,
                cases,
                perturb,
            },
            out,
        ),
    };
    match result {
        Ok(o) => {
            let _ = stdout.write_all(o.stdout.as_bytes());
            o.code
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            error_code(&e)
        }
    }
}
