use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::Operator;
use crate::vector::Vector;

use super::{step, SchemeConfig};

/// Iterates whose norm exceeds this are treated as diverged.
pub const DIVERGENCE_THRESHOLD: f64 = 1e12;

/// How [`run`] decides it is done.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopRule {
    /// True error when the operator's fixed point is known, successive
    /// difference otherwise.
    #[default]
    Auto,
    /// Stop once `‖x_{n+1} − x_n‖ ≤ tol`.
    SuccessiveDifference,
    /// Stop once `‖x_n − q‖ ≤ tol`; needs a known fixed point.
    TrueError,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    ToleranceMet,
    MaxIter,
    Diverged,
}

impl fmt::Display for StopReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StopReason::ToleranceMet => "tolerance_met",
            StopReason::MaxIter => "max_iter",
            StopReason::Diverged => "diverged",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub stop: StopRule,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            tol: 1e-10,
            max_iter: 10_000,
            stop: StopRule::Auto,
        }
    }
}

/// The iterates `x_0..x_N` of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationTrace {
    pub points: Vec<Vector>,
    /// `‖x_n − q‖` for every point, when the fixed point is known.
    pub errors: Option<Vec<f64>>,
    pub stop_reason: StopReason,
    pub iterations: usize,
}

impl IterationTrace {
    pub fn last(&self) -> &Vector {
        self.points.last().expect("a trace holds at least x_0")
    }

    pub fn final_error(&self) -> Option<f64> {
        self.errors.as_ref().and_then(|e| e.last().copied())
    }
}

/// Iterates `cfg` from `x0` until the stop rule fires, `max_iter` steps are
/// taken, or the iterates diverge.
///
/// With [`StopRule::SuccessiveDifference`] the tolerance bounds the last
/// step length, not the distance to the fixed point.
pub fn run(op: &Operator, cfg: &SchemeConfig, x0: &Vector, opts: RunOptions) -> Result<IterationTrace> {
    cfg.validate()?;
    x0.check_dim(op.dim())?;
    if !(opts.tol > 0.0) {
        return Err(Error::invariant("run tolerance", format!("tol must be positive, got {}", opts.tol)));
    }
    if opts.max_iter == 0 {
        return Err(Error::invariant("run iteration cap", "max_iter must be at least 1"));
    }
    let q = op.fixed_point();
    let true_error = match opts.stop {
        StopRule::TrueError => {
            q.ok_or_else(|| Error::MissingFixedPoint(op.id().to_string()))?;
            true
        }
        StopRule::SuccessiveDifference => false,
        StopRule::Auto => q.is_some(),
    };
    let err_of = |x: &Vector| q.map(|q| op.dist(x, q));

    let mut points = vec![x0.clone()];
    let mut errors = q.map(|_| vec![err_of(x0).unwrap()]);
    let mut reason = StopReason::MaxIter;

    if true_error && err_of(x0).unwrap() <= opts.tol {
        reason = StopReason::ToleranceMet;
    } else {
        for n in 0..opts.max_iter {
            let x = points.last().unwrap();
            let next = match step(op, cfg, x, n) {
                Ok(v) => v,
                Err(Error::NonFinite { .. }) => {
                    reason = StopReason::Diverged;
                    break;
                }
                Err(e) => return Err(e),
            };
            let diverged = op.norm().of(&next) > DIVERGENCE_THRESHOLD;
            let done = if true_error {
                err_of(&next).unwrap() <= opts.tol
            } else {
                op.dist(&next, x) <= opts.tol
            };
            if let Some(errs) = errors.as_mut() {
                errs.push(err_of(&next).unwrap());
            }
            points.push(next);
            if diverged {
                reason = StopReason::Diverged;
                break;
            }
            if done {
                reason = StopReason::ToleranceMet;
                break;
            }
        }
    }

    Ok(IterationTrace {
        iterations: points.len() - 1,
        points,
        errors,
        stop_reason: reason,
    })
}
