//! Perturbed-sequence experiments for T-stability.
//!
//! A scheme `x_{n+1} = f(T, x_n)` is T-stable when every sequence `y_n`
//! whose residuals `ε_n = ‖y_{n+1} − f(T, y_n)‖` vanish converges to the
//! fixed point. Limits are decided numerically: the mean over the final 10%
//! of a run stands in for the limit and is compared against a tolerance.
//!
//! Perturbations are injected only at the top level,
//! `y_{n+1} = f(T, y_n) + δ_n`; the inner levels of `f` are recomputed from
//! `y_n` exactly as in the unperturbed step.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::analysis::{lemma1_oracle, sup_sigma};
use crate::error::{Error, Result};
use crate::operators::Operator;
use crate::schemes::{run, step, RunOptions, SchemeConfig, StopReason, StopRule, DIVERGENCE_THRESHOLD};
use crate::vector::Vector;

/// How `δ_n` is generated. Deterministic kinds push along the first
/// coordinate axis, so `‖δ_n‖` is the stated magnitude in every norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PerturbationModel {
    None,
    /// `‖δ_n‖ = c·r^n`
    Decaying { c: f64, r: f64 },
    /// `‖δ_n‖ = c`
    Persistent { c: f64 },
    /// Coordinates of `δ_n` uniform in `[0, c·r^n]`.
    RandomDecaying { c: f64, r: f64, seed: u64 },
}

impl PerturbationModel {
    pub fn validate(&self) -> Result<()> {
        let bad = |detail: String| Err(Error::invariant("PerturbationModel parameters", detail));
        match *self {
            PerturbationModel::None => Ok(()),
            PerturbationModel::Persistent { c } if !(c >= 0.0 && c.is_finite()) => bad(format!("c must be >= 0, got {c}")),
            PerturbationModel::Persistent { .. } => Ok(()),
            PerturbationModel::Decaying { c, r } | PerturbationModel::RandomDecaying { c, r, .. } => {
                if !(c >= 0.0 && c.is_finite()) {
                    bad(format!("c must be >= 0, got {c}"))
                } else if !(0.0..1.0).contains(&r) {
                    bad(format!("r must lie in [0, 1), got {r}"))
                } else {
                    Ok(())
                }
            }
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match *self {
            PerturbationModel::RandomDecaying { seed, .. } => Some(seed),
            _ => None,
        }
    }

    /// Decay ratio of `‖δ_n‖`, if the perturbation vanishes.
    pub fn decay_ratio(&self) -> Option<f64> {
        match *self {
            PerturbationModel::None => Some(0.0),
            PerturbationModel::Decaying { r, .. } | PerturbationModel::RandomDecaying { r, .. } => Some(r),
            PerturbationModel::Persistent { .. } => None,
        }
    }

    fn magnitude(&self) -> f64 {
        match *self {
            PerturbationModel::None => 0.0,
            PerturbationModel::Decaying { c, .. }
            | PerturbationModel::Persistent { c }
            | PerturbationModel::RandomDecaying { c, .. } => c,
        }
    }

    fn stream(&self, dim: usize) -> Perturbations {
        Perturbations {
            model: *self,
            dim,
            rng: ChaCha8Rng::seed_from_u64(self.seed().unwrap_or(0)),
        }
    }
}

struct Perturbations {
    model: PerturbationModel,
    dim: usize,
    rng: ChaCha8Rng,
}

impl Perturbations {
    fn delta(&mut self, n: usize) -> Option<Vector> {
        let axis = |m: f64| {
            let mut v = vec![0.0; self.dim];
            v[0] = m;
            Vector::from_raw(v)
        };
        match self.model {
            PerturbationModel::None => None,
            PerturbationModel::Decaying { c, r } => Some(axis(c * r.powi(n as i32))),
            PerturbationModel::Persistent { c } => Some(axis(c)),
            PerturbationModel::RandomDecaying { c, r, .. } => {
                let hi = c * r.powi(n as i32);
                let rng = &mut self.rng;
                Some(Vector::from_raw((0..self.dim).map(|_| hi * rng.gen::<f64>()).collect()))
            }
        }
    }
}

impl fmt::Display for PerturbationModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PerturbationModel::None => f.write_str("none"),
            PerturbationModel::Decaying { c, r } => write!(f, "decaying(c={c}, r={r})"),
            PerturbationModel::Persistent { c } => write!(f, "persistent(c={c})"),
            PerturbationModel::RandomDecaying { c, r, seed } => write!(f, "random-decaying(c={c}, r={r}, seed={seed})"),
        }
    }
}

/// A perturbed sequence `y_0..y_N`, truncated if it diverged.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbedRun {
    pub points: Vec<Vector>,
    pub diverged: bool,
}

/// `y_{n+1} = step(T, cfg, y_n, n) + δ_n` for `n_steps` steps.
pub fn perturbed_run(
    op: &Operator,
    cfg: &SchemeConfig,
    y0: &Vector,
    model: &PerturbationModel,
    n_steps: usize,
) -> Result<PerturbedRun> {
    cfg.validate()?;
    model.validate()?;
    y0.check_dim(op.dim())?;
    if n_steps == 0 {
        return Err(Error::invariant("perturbed run length", "n_steps must be at least 1"));
    }
    let mut deltas = model.stream(op.dim());
    let mut points = Vec::with_capacity(n_steps + 1);
    points.push(y0.clone());
    for n in 0..n_steps {
        let mut next = match step(op, cfg, &points[n], n) {
            Ok(v) => v,
            Err(Error::NonFinite { .. }) => return Ok(PerturbedRun { points, diverged: true }),
            Err(e) => return Err(e),
        };
        if let Some(d) = deltas.delta(n) {
            next = next.add(&d);
        }
        if !next.is_finite() || op.norm().of(&next) > DIVERGENCE_THRESHOLD {
            return Ok(PerturbedRun { points, diverged: true });
        }
        points.push(next);
    }
    Ok(PerturbedRun { points, diverged: false })
}

/// `ε_n = ‖y_{n+1} − step(T, cfg, y_n, n)‖` for every consecutive pair.
pub fn measure_residuals(op: &Operator, cfg: &SchemeConfig, y: &[Vector]) -> Result<Vec<f64>> {
    if y.len() < 2 {
        return Err(Error::invariant("residual sequence", "need at least two points"));
    }
    y.windows(2)
        .enumerate()
        .map(|(n, w)| Ok(op.dist(&w[1], &step(op, cfg, &w[0], n)?)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    /// Residuals vanished and the sequence reached `q`.
    StableConsistent,
    /// Residuals did not vanish; the stability implication is vacuous.
    HypothesisFailed,
    /// Residuals vanished but the sequence did not reach `q`.
    Violation,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::StableConsistent => "stable_consistent",
            Verdict::HypothesisFailed => "hypothesis_failed",
            Verdict::Violation => "VIOLATION",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityOptions {
    pub n_steps: usize,
    pub tol_eps: f64,
    pub tol_y: f64,
    /// Residual tail allowed once `y_n → q` was observed; defaults to
    /// `2·tol_y`, since `ε_n ≤ ‖y_{n+1} − q‖ + σ‖y_n − q‖` with `σ < 1`.
    pub tol_eps_converse: Option<f64>,
}

impl Default for StabilityOptions {
    fn default() -> Self {
        StabilityOptions {
            n_steps: 1000,
            tol_eps: 1e-6,
            tol_y: 1e-6,
            tol_eps_converse: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    /// `ε_n` for `n = 0..N−1`.
    pub eps: Vec<f64>,
    /// `‖y_n − q‖` for `n = 0..N`.
    pub y_errors: Vec<f64>,
    pub eps_tail: f64,
    pub y_tail: f64,
    pub verdict: Verdict,
    /// `y_n → q` was observed but the residuals did not vanish.
    pub converse_violation: bool,
    /// Largest `σ` over the run, when the operator declares constants.
    pub sigma: Option<f64>,
    pub seed: Option<u64>,
    pub diverged: bool,
    /// The unperturbed run from `y_0` reached `q` within the same budget.
    /// When `false` the verdict is only conditional.
    pub unperturbed_converged: bool,
}

/// Mean of the final 10% (at least one entry).
pub fn tail_mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    let k = (v.len() / 10).max(1);
    v[v.len() - k..].iter().sum::<f64>() / k as f64
}

/// Runs a perturbed sequence and classifies it.
pub fn stability_verdict(
    op: &Operator,
    cfg: &SchemeConfig,
    y0: &Vector,
    model: &PerturbationModel,
    opts: StabilityOptions,
) -> Result<StabilityReport> {
    let q = op.require_fixed_point()?.clone();
    let pr = perturbed_run(op, cfg, y0, model, opts.n_steps)?;
    let eps = if pr.points.len() >= 2 {
        measure_residuals(op, cfg, &pr.points)?
    } else {
        Vec::new()
    };
    let y_errors: Vec<f64> = pr.points.iter().map(|y| op.dist(y, &q)).collect();
    let (eps_tail, y_tail) = if pr.diverged {
        (f64::INFINITY, f64::INFINITY)
    } else {
        (tail_mean(&eps), tail_mean(&y_errors))
    };

    let verdict = if !(eps_tail <= opts.tol_eps) {
        Verdict::HypothesisFailed
    } else if y_tail > opts.tol_y {
        Verdict::Violation
    } else {
        Verdict::StableConsistent
    };
    let converse_tol = opts.tol_eps_converse.unwrap_or(2.0 * opts.tol_y);
    let converse_violation = y_tail <= opts.tol_y && eps_tail > converse_tol;

    let unperturbed = run(
        op,
        cfg,
        y0,
        RunOptions {
            tol: opts.tol_y,
            max_iter: opts.n_steps,
            stop: StopRule::TrueError,
        },
    )?;
    let sigma = match op.constants() {
        Some(k) => Some(sup_sigma(cfg, k.a, cfg.distinct_steps().unwrap_or(opts.n_steps))?),
        None => None,
    };

    Ok(StabilityReport {
        eps,
        y_errors,
        eps_tail,
        y_tail,
        verdict,
        converse_violation,
        sigma,
        seed: model.seed(),
        diverged: pr.diverged,
        unperturbed_converged: unperturbed.stop_reason == StopReason::ToleranceMet,
    })
}

/// First `n` with `‖y_n − q‖ > u_n + tol`, where `u` is the recursion
/// envelope `u_{n+1} = σu_n + ε_n` started at `‖y_0 − q‖`.
pub fn envelope_violation(report: &StabilityReport, sigma: f64, tol: f64) -> Result<Option<usize>> {
    let u = lemma1_oracle(sigma, report.y_errors[0], &report.eps)?;
    Ok(report
        .y_errors
        .iter()
        .zip(&u)
        .position(|(e, env)| *e > env + tol))
}

/// First `n` with `ε_n > ‖y_{n+1} − q‖ + σ‖y_n − q‖ + tol`.
pub fn converse_inequality_violation(report: &StabilityReport, sigma: f64, tol: f64) -> Option<usize> {
    report
        .eps
        .iter()
        .enumerate()
        .position(|(n, e)| *e > report.y_errors[n + 1] + sigma * report.y_errors[n] + tol)
}

/// Step count after which a run with contraction `σ` and a perturbation
/// decaying like `r^n` has its final 10% well below `tol`. Never less than
/// 1000; persistent perturbations get the default 1000.
pub fn recommended_steps(sigma: f64, model: &PerturbationModel, initial_error: f64, tol: f64) -> usize {
    const FLOOR: usize = 1000;
    const CEILING: usize = 200_000;
    let Some(r) = model.decay_ratio() else {
        return FLOOR;
    };
    let rho = sigma.max(r);
    if !(rho < 1.0) {
        return CEILING;
    }
    if rho <= 0.0 {
        return FLOOR;
    }
    let scale = (initial_error + model.magnitude()).max(f64::MIN_POSITIVE);
    // 1e-6 margin absorbs the polynomial factor when σ and r coincide
    let need = ((tol * 1e-6 / scale).ln() / rho.ln() / 0.9).ceil();
    (need as usize + 10).clamp(FLOOR, CEILING)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::corpus;
    use crate::schemes::{specialize, ClassicScheme, WeightSchedule};

    fn kirk_mann() -> SchemeConfig {
        specialize(&ClassicScheme::KirkMann {
            alpha: WeightSchedule::constant(vec![0.5, 0.5]).unwrap(),
        })
        .unwrap()
    }

    fn halving() -> Operator {
        corpus::get("halving-1d").unwrap()
    }

    #[test]
    fn no_perturbation_reproduces_the_run() {
        let op = halving();
        let cfg = kirk_mann();
        let y0 = Vector::scalar(1.0);
        let pr = perturbed_run(&op, &cfg, &y0, &PerturbationModel::None, 60).unwrap();
        let t = run(&op, &cfg, &y0, RunOptions { tol: 1e-300, max_iter: 60, stop: StopRule::TrueError }).unwrap();
        assert_eq!(pr.points, t.points);
    }

    #[test]
    fn injected_residuals_are_recovered() {
        let op = halving();
        let cfg = kirk_mann();
        let model = PerturbationModel::Decaying { c: 0.1, r: 0.9 };
        let pr = perturbed_run(&op, &cfg, &Vector::scalar(1.0), &model, 300).unwrap();
        let eps = measure_residuals(&op, &cfg, &pr.points).unwrap();
        for (n, e) in eps.iter().enumerate() {
            assert!((e - 0.1 * 0.9f64.powi(n as i32)).abs() <= 1e-12);
        }
        let pr = perturbed_run(&op, &cfg, &Vector::scalar(1.0), &PerturbationModel::Persistent { c: 0.1 }, 100).unwrap();
        for e in measure_residuals(&op, &cfg, &pr.points).unwrap() {
            assert!((e - 0.1).abs() <= 1e-12);
        }
    }

    #[test]
    fn residuals_vanish_on_the_fixed_point() {
        let op = corpus::get("affine-1d").unwrap();
        let ys = vec![Vector::scalar(1.0); 20];
        assert!(measure_residuals(&op, &kirk_mann(), &ys).unwrap().iter().all(|e| *e == 0.0));
        assert!(measure_residuals(&op, &kirk_mann(), &ys[..1]).is_err());
    }

    #[test]
    fn decaying_is_stable_consistent() {
        let opts = StabilityOptions { n_steps: 500, ..Default::default() };
        let r = stability_verdict(
            &halving(),
            &kirk_mann(),
            &Vector::scalar(1.0),
            &PerturbationModel::Decaying { c: 0.1, r: 0.9 },
            opts,
        )
        .unwrap();
        assert_eq!(r.verdict, Verdict::StableConsistent);
        assert!(!r.converse_violation);
        assert_eq!(r.sigma, Some(0.75));
        assert!(r.unperturbed_converged);
        assert_eq!(envelope_violation(&r, 0.75, 1e-8).unwrap(), None);
        assert_eq!(converse_inequality_violation(&r, 0.75, 1e-8), None);
    }

    #[test]
    fn persistent_is_hypothesis_failed() {
        let r = stability_verdict(
            &halving(),
            &kirk_mann(),
            &Vector::scalar(1.0),
            &PerturbationModel::Persistent { c: 0.1 },
            StabilityOptions::default(),
        )
        .unwrap();
        assert_eq!(r.verdict, Verdict::HypothesisFailed);
        // y ↦ 0.75y + 0.1 settles at 0.4
        assert!((r.y_tail - 0.4).abs() < 1e-9);
    }

    #[test]
    fn unperturbed_converges() {
        let r = stability_verdict(
            &halving(),
            &kirk_mann(),
            &Vector::scalar(5.0),
            &PerturbationModel::None,
            StabilityOptions::default(),
        )
        .unwrap();
        assert_eq!(r.verdict, Verdict::StableConsistent);
        assert!(r.eps.iter().all(|e| *e == 0.0));
        assert!(r.y_tail <= 1e-6);
    }

    #[test]
    fn random_model_replays_from_seed() {
        let op = corpus::get("rotation-2d").unwrap();
        let model = PerturbationModel::RandomDecaying { c: 0.5, r: 0.8, seed: 42 };
        let y0 = Vector::new(vec![4.0, -2.0]).unwrap();
        let a = perturbed_run(&op, &kirk_mann(), &y0, &model, 200).unwrap();
        let b = perturbed_run(&op, &kirk_mann(), &y0, &model, 200).unwrap();
        assert_eq!(a, b);
        let other = PerturbationModel::RandomDecaying { c: 0.5, r: 0.8, seed: 43 };
        assert_ne!(a, perturbed_run(&op, &kirk_mann(), &y0, &other, 200).unwrap());
    }

    #[test]
    fn missing_fixed_point_is_an_error() {
        let op = Operator::new("free", 1, |x| vec![x[0] / 2.0]);
        let err = stability_verdict(
            &op,
            &kirk_mann(),
            &Vector::scalar(1.0),
            &PerturbationModel::None,
            StabilityOptions::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::MissingFixedPoint(_)));
    }

    #[test]
    fn divergence_truncates() {
        let op = corpus::get("doubling-1d").unwrap();
        let cfg = specialize(&ClassicScheme::Picard).unwrap();
        let pr = perturbed_run(&op, &cfg, &Vector::scalar(1.0), &PerturbationModel::None, 100).unwrap();
        assert!(pr.diverged);
        assert_eq!(pr.points.len(), 40);
    }

    #[test]
    fn model_validation() {
        assert!(PerturbationModel::Decaying { c: 0.1, r: 1.0 }.validate().is_err());
        assert!(PerturbationModel::Persistent { c: -1.0 }.validate().is_err());
        assert!(PerturbationModel::RandomDecaying { c: 1.0, r: 0.5, seed: 1 }.validate().is_ok());
    }

    #[test]
    fn recommended_steps_grow_with_sigma() {
        let m = PerturbationModel::Decaying { c: 0.1, r: 0.5 };
        assert_eq!(recommended_steps(0.5, &m, 10.0, 1e-6), 1000);
        assert!(recommended_steps(0.995, &m, 10.0, 1e-6) > 5000);
        assert_eq!(recommended_steps(0.5, &PerturbationModel::Persistent { c: 1.0 }, 1.0, 1e-6), 1000);
    }
}
