//! Library half of the `kirk-iter` command-line tool: experiment configs and
//! the subcommands that run them.

pub mod commands;
pub mod config;

use std::path::PathBuf;

pub use commands::{Outcome, Status};
pub use config::{ExperimentConfig, PerturbationDoc, ScheduleDoc, SchemeDoc};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Action {
    Run,
    Sigma,
    Stability,
    CheckOperator { list: bool },
    Compare,
}

/// Command-line values that take precedence over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub operator: Option<String>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub steps: Option<usize>,
    pub tol: Option<f64>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut ExperimentConfig) {
        if let Some(v) = &self.operator {
            cfg.operator = Some(v.clone());
        }
        if let Some(v) = &self.out {
            cfg.out = Some(v.clone());
        }
        if let Some(v) = self.seed {
            cfg.seed = Some(v);
        }
        if let Some(v) = self.steps {
            cfg.steps = Some(v);
        }
        if let Some(v) = self.tol {
            cfg.tol = Some(v);
        }
    }
}

/// Runs one action. Every error becomes [`Status::Validation`] with the
/// message as the summary.
pub fn execute(action: Action, cfg: &ExperimentConfig) -> Outcome {
    let result = match action {
        Action::Run => commands::cmd_run(cfg),
        Action::Sigma => commands::cmd_sigma(cfg),
        Action::Stability => commands::cmd_stability(cfg),
        Action::CheckOperator { list: true } => commands::cmd_list_operators(),
        Action::CheckOperator { list: false } => commands::cmd_check_operator(cfg),
        Action::Compare => commands::cmd_compare(cfg),
    };
    result.unwrap_or_else(|e| Outcome {
        status: Status::Validation,
        csv: Vec::new(),
        summary: format!("error: {e:#}\n"),
    })
}
