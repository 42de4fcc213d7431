//! `boott`: confidence intervals for a mean via weighted bootstrap-t and
//! friends, plus the simulation study and exact small-sample tools.

mod cmd_analyze;
mod cmd_ci;
mod cmd_exact;
mod cmd_score;
mod cmd_simulate;
mod manifest;

use clap::{Parser, Subcommand};

use boott_core::Error;

#[derive(Parser)]
#[command(
    name = "boott",
    version,
    about = "Bootstrap-t confidence intervals for a mean, coverage studies, and exact small-n tools"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute one confidence interval from a data file (one value per line).
    Ci(cmd_ci::CiArgs),
    /// Run the coverage/length study and emit result CSVs.
    Simulate(cmd_simulate::SimulateArgs),
    /// Score intervals from a CSV of (L,U) rows against a known mean.
    Score(cmd_score::ScoreArgs),
    /// Exact small-sample computations (n=2 width factors, exact t law).
    Exact(cmd_exact::ExactArgs),
    /// Analytic probabilities, thresholds, and moment checks.
    Analyze(cmd_analyze::AnalyzeArgs),
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) | Error::Domain(_) => 2,
        Error::Data(_) | Error::Io { .. } => 3,
        Error::Internal(_) => 1,
    }
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Ci(args) => cmd_ci::run(args),
        Command::Simulate(args) => cmd_simulate::run(args),
        Command::Score(args) => cmd_score::run(args),
        Command::Exact(args) => cmd_exact::run(args),
        Command::Analyze(args) => cmd_analyze::run(args),
    };
    if let Err(err) = result {
        eprintln!("error: {err}");
        std::process::exit(exit_code(&err));
    }
}
