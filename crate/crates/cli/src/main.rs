//! Command-line front end for the robust sparse-regression toolkit.
//!
//! Exit codes: 0 success, 1 input or configuration error, 2 completed with
//! warnings (a fit that ran out of iterations before converging).

mod commands;
mod io;

use std::process::ExitCode;

use clap::{ArgAction, Parser, Subcommand};

use commands::{
    cmd_contour, cmd_cv, cmd_fit, cmd_predict, cmd_simulate, ContourArgs, CvArgs, FitArgs,
    PredictArgs, SimulateArgs,
};

#[derive(Parser, Debug)]
#[command(
    name = "dpd-lasso",
    version,
    about = "Robust sparse linear regression: density-power-divergence loss with an l1 penalty"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Base seed for every randomized component; sub-seeds are derived from it
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Print progress details to stderr
    #[arg(short, long, global = true, action = ArgAction::Count)]
    verbose: u8,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fit the estimator on a CSV dataset and write the model as JSON
    Fit(FitArgs),
    /// Apply a saved model to a feature CSV
    Predict(PredictArgs),
    /// Cross-validate the penalty weight with l-score stratified folds
    Cv(CvArgs),
    /// Run the seeded contamination benchmark described by a config file
    Simulate(SimulateArgs),
    /// Evaluate loss surfaces on the two-predictor outlier scenario
    Contour(ContourArgs),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // usage problems are input errors: report and exit 1
            let _ = e.print();
            return ExitCode::from(1);
        }
    };

    let result = match &cli.command {
        Command::Fit(args) => cmd_fit(args, cli.seed, cli.verbose),
        Command::Predict(args) => cmd_predict(args),
        Command::Cv(args) => cmd_cv(args, cli.seed, cli.verbose),
        Command::Simulate(args) => cmd_simulate(args, cli.seed, cli.verbose),
        Command::Contour(args) => cmd_contour(args, cli.seed, cli.verbose),
    };

    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
