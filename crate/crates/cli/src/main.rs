//! `evicalc`: audits, evaluations, comparisons and canned demonstrations.
//!
//! Exit codes: 0 success or axiom holds, 1 usage error, 2 input error,
//! 3 axiom violated.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use evicalc::{EvokingThresholds, LogBase};

use config::{AxiomArg, CalculusArg, DemoArg, FamilyArg, FormatArg, MeasureArg};

pub const EXIT_OK: u8 = 0;
pub const EXIT_USAGE: u8 = 1;
pub const EXIT_INPUT: u8 = 2;
pub const EXIT_VIOLATED: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "evicalc", version, about = "Belief-update calculi audited against exact enumeration")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct OutputArgs {
    #[arg(long, value_enum, default_value = "text")]
    format: FormatArg,
    /// Write to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CalculusArgs {
    /// Logarithm base for weights: `e`, `10` or any number above 1.
    #[arg(long, default_value = "e")]
    log_base: LogBase,
    /// Four comma-separated posterior cut points for evoking strengths.
    #[arg(long, default_value_t = EvokingThresholds::default())]
    thresholds: EvokingThresholds,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check an update measure against modularity and the basic update property.
    Audit {
        #[arg(long, value_enum)]
        measure: MeasureArg,
        #[arg(long, value_enum, default_value = "all")]
        axiom: AxiomArg,
        /// Defaults to `explicit` when `--model` is given, else `ci-grid`.
        #[arg(long, value_enum)]
        family: Option<FamilyArg>,
        #[arg(long, env = "EVICALC_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 500)]
        samples: usize,
        /// Evidence variables per scenario; 3 for ci-random, 2 otherwise.
        #[arg(long)]
        arity: Option<usize>,
        /// Modularity tolerance.
        #[arg(long, default_value_t = evicalc::audit::DEFAULT_TOLERANCE)]
        tol: f64,
        /// Component match tolerance of the collision search.
        #[arg(long, default_value_t = evicalc::audit::DEFAULT_MATCH_TOLERANCE)]
        match_tol: f64,
        /// Combined-update separation that makes a match a collision.
        #[arg(long, default_value_t = evicalc::audit::DEFAULT_COLLISION_TOLERANCE)]
        collision_tol: f64,
        /// Model files for the explicit family.
        #[arg(long)]
        model: Vec<PathBuf>,
        #[command(flatten)]
        calculus: CalculusArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run one of the canned demonstrations.
    Demo {
        #[arg(value_enum)]
        name: DemoArg,
        #[command(flatten)]
        calculus: CalculusArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Evaluate a rulebase over a case file.
    Eval {
        #[arg(long)]
        rules: PathBuf,
        #[arg(long = "case")]
        case: PathBuf,
        /// Defaults to the rulebase's own kind.
        #[arg(long, value_enum)]
        calculus: Option<CalculusArg>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Compare every calculus with enumeration over a set of cases.
    Compare {
        /// One model file per hypothesis.
        #[arg(long, required = true)]
        model: Vec<PathBuf>,
        /// Case file; exhaustive cases over the shared findings if absent.
        #[arg(long = "case")]
        case: Option<PathBuf>,
        /// Restrict to these calculi.
        #[arg(long, value_enum)]
        calculus: Vec<CalculusArg>,
        /// Cases sampled when the shared findings are too many to enumerate.
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, env = "EVICALC_SEED", default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        calculus_args: CalculusArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { EXIT_OK });
        }
    };
    match commands::run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
