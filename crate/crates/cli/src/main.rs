use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use kirk_iter_cli::{execute, Action, ExperimentConfig, Overrides, Status};

/// Kirk-type multistep fixed-point iteration experiments.
#[derive(Parser)]
#[command(name = "kirk-iter", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Experiment config (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write CSV here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Step budget (run length, stability steps, sigma rows).
    #[arg(long, global = true)]
    steps: Option<usize>,
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Corpus operator id, overriding the config.
    #[arg(long, global = true)]
    operator: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Iterate a scheme and write the trace.
    Run,
    /// Print the contraction factor breakdown.
    Sigma,
    /// Run a perturbed sequence and classify it.
    Stability,
    /// Test an operator's declared contractive class.
    CheckOperator {
        /// List the operator corpus instead.
        #[arg(long)]
        list: bool,
    },
    /// Run several schemes on one operator.
    Compare,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let action = match cli.command {
        Command::Run => Action::Run,
        Command::Sigma => Action::Sigma,
        Command::Stability => Action::Stability,
        Command::CheckOperator { list } => Action::CheckOperator { list },
        Command::Compare => Action::Compare,
    };
    let mut cfg = match &cli.common.config {
        Some(path) => match ExperimentConfig::load(path) {
            Ok(c) => c,
            Err(e) => return fail(&format!("error: {e:#}")),
        },
        None => ExperimentConfig::default(),
    };
    Overrides {
        operator: cli.common.operator,
        out: cli.common.out,
        seed: cli.common.seed,
        steps: cli.common.steps,
        tol: cli.common.tol,
    }
    .apply(&mut cfg);

    let outcome = execute(action, &cfg);
    if outcome.status == Status::Validation {
        return fail(outcome.summary.trim_end());
    }
    match &cfg.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &outcome.csv) {
                return fail(&format!("error: writing {}: {e}", path.display()));
            }
            print!("{}", outcome.summary);
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(&outcome.csv).and_then(|_| stdout.flush()).is_err() {
                return fail("error: writing CSV to stdout");
            }
            eprint!("{}", outcome.summary);
        }
    }
    ExitCode::from(outcome.status.code() as u8)
}

fn fail(msg: &str) -> ExitCode {
    eprintln!("{msg}");
    ExitCode::from(Status::Validation.code() as u8)
}
