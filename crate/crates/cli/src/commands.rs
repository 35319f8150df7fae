use std::fmt::Write as _;

use anyhow::{anyhow, bail, Result};
use rayon::prelude::*;

use kirk_iter::analysis::{estimate_rate, sigma, sup_sigma, RateEstimate};
use kirk_iter::export::{self, format_float};
use kirk_iter::operators::{
    check_condition, corpus, unique_fixed_point, verify_lemma2, Condition, ConditionReport, Operator, UniformPairs,
    DEFAULT_TOL,
};
use kirk_iter::schemes::{run, IterationTrace, RunOptions, SchemeConfig, StopReason};
use kirk_iter::stability::{
    converse_inequality_violation, envelope_violation, stability_verdict, StabilityOptions, Verdict,
};
use kirk_iter::Vector;

use crate::config::ExperimentConfig;

/// Process exit statuses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok = 0,
    Validation = 1,
    Diverged = 2,
    MaxIter = 3,
    Violation = 4,
    HypothesisFailed = 5,
}

impl Status {
    pub fn code(self) -> i32 {
        self as i32
    }

    fn of_stop(reason: StopReason) -> Self {
        match reason {
            StopReason::ToleranceMet => Status::Ok,
            StopReason::Diverged => Status::Diverged,
            StopReason::MaxIter => Status::MaxIter,
        }
    }
}

/// What a command produced: CSV bytes for the output file and a
/// human-readable summary.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub status: Status,
    pub csv: Vec<u8>,
    pub summary: String,
}

const DEFAULT_RUN_STEPS: usize = 10_000;
const DEFAULT_SIGMA_ROWS: usize = 100;
const DEFAULT_SAMPLES: usize = 10_000;
const DEFAULT_MAX_POWER: usize = 10;

fn run_options(cfg: &ExperimentConfig) -> RunOptions {
    RunOptions {
        tol: cfg.tol.unwrap_or(1e-10),
        max_iter: cfg.steps.unwrap_or(DEFAULT_RUN_STEPS),
        stop: cfg.stop.unwrap_or_default(),
    }
}

fn scheme_line(scheme: &SchemeConfig) -> String {
    format!("{} powers {:?}", scheme.family(), scheme.powers())
}

fn sigma_sup(op: &Operator, scheme: &SchemeConfig, a: Option<f64>, steps: usize) -> Result<Option<f64>> {
    let a = match a.or_else(|| op.constants().map(|k| k.a)) {
        Some(a) => a,
        None => return Ok(None),
    };
    Ok(Some(sup_sigma(scheme, a, scheme.distinct_steps().unwrap_or(steps))?))
}

fn fit(trace: &IterationTrace) -> Option<RateEstimate> {
    estimate_rate(trace, None).ok()
}

fn opt(v: Option<f64>) -> String {
    v.map(format_float).unwrap_or_else(|| "n/a".into())
}

pub fn cmd_run(cfg: &ExperimentConfig) -> Result<Outcome> {
    cfg.check_action("run")?;
    let op = cfg.operator()?;
    let scheme = cfg.scheme()?;
    let x0 = cfg.x0(&op)?;
    let opts = run_options(cfg);
    let trace = run(&op, &scheme, &x0, opts)?;

    let mut csv = Vec::new();
    export::write_trace_csv(&mut csv, &trace)?;
    let rate = fit(&trace);
    let sigma = sigma_sup(&op, &scheme, cfg.a, trace.iterations)?;
    let mut s = String::new();
    writeln!(s, "operator: {}", op.id())?;
    writeln!(s, "scheme: {}", scheme_line(&scheme))?;
    writeln!(s, "iterations: {}", trace.iterations)?;
    writeln!(s, "stop_reason: {}", trace.stop_reason)?;
    match trace.final_error() {
        Some(e) => writeln!(s, "final_error: {}", format_float(e))?,
        None => writeln!(s, "final_point: {}", trace.last())?,
    }
    writeln!(s, "fitted_rate: {}", opt(rate.as_ref().map(|r| r.fitted_rate)))?;
    writeln!(s, "sigma: {}", opt(sigma))?;
    Ok(Outcome {
        status: Status::of_stop(trace.stop_reason),
        csv,
        summary: s,
    })
}

pub fn cmd_sigma(cfg: &ExperimentConfig) -> Result<Outcome> {
    cfg.check_action("sigma")?;
    let scheme = cfg.scheme()?;
    let op = match &cfg.operator {
        Some(_) => Some(cfg.operator()?),
        None => None,
    };
    let a = cfg
        .a
        .or_else(|| op.as_ref().and_then(|o| o.constants().map(|k| k.a)))
        .ok_or_else(|| anyhow!("ExperimentConfig a: give `a` or an operator with declared constants"))?;
    let rows = cfg.steps.or(scheme.distinct_steps()).unwrap_or(DEFAULT_SIGMA_ROWS).max(1);

    // observed per-step ratios from a run, when x0 and q are known
    let observed: Option<Vec<f64>> = match (&op, &cfg.x0) {
        (Some(op), Some(_)) if op.fixed_point().is_some() => {
            let x0 = cfg.x0(op)?;
            let opts = RunOptions {
                max_iter: rows,
                ..run_options(cfg)
            };
            let t = run(op, &scheme, &x0, opts)?;
            let e = t.errors.expect("fixed point is known");
            Some(e.windows(2).filter(|w| w[0] > 0.0).map(|w| w[1] / w[0]).collect())
        }
        _ => None,
    };

    let mut table = Vec::with_capacity(rows);
    for n in 0..rows {
        let b = sigma(&scheme, a, n)?;
        table.push((n, b.sigma, observed.as_ref().and_then(|o| o.get(n).copied())));
    }
    let mut csv = Vec::new();
    export::write_sigma_csv(&mut csv, &table)?;

    let first = sigma(&scheme, a, 0)?;
    let sup = table.iter().map(|r| r.1).fold(f64::NEG_INFINITY, f64::max);
    let mut s = String::new();
    writeln!(s, "scheme: {}", scheme_line(&scheme))?;
    writeln!(s, "a: {a}")?;
    writeln!(s, "sigma: {}", first.sigma)?;
    writeln!(s, "terms: {:?}", first.terms)?;
    writeln!(s, "inner_sums: {:?}", first.inner_sums)?;
    if rows > 1 {
        writeln!(s, "sup_sigma over {rows} steps: {sup}")?;
    }
    if (0.0..1.0).contains(&sup) {
        writeln!(s, "sigma < 1: yes")?;
    } else {
        writeln!(s, "sigma < 1: no (degenerate: no contraction guarantee)")?;
    }
    Ok(Outcome {
        status: Status::Ok,
        csv,
        summary: s,
    })
}

pub fn cmd_stability(cfg: &ExperimentConfig) -> Result<Outcome> {
    cfg.check_action("stability")?;
    let op = cfg.operator()?;
    let scheme = cfg.scheme()?;
    let y0 = cfg.x0(&op)?;
    let model = cfg.perturbation()?;
    let tol = cfg.tol.unwrap_or(1e-6);
    let opts = StabilityOptions {
        n_steps: cfg.steps.unwrap_or(1000),
        tol_eps: cfg.tol_eps.unwrap_or(tol),
        tol_y: cfg.tol_y.unwrap_or(tol),
        tol_eps_converse: cfg.tol_eps_converse,
    };
    let report = stability_verdict(&op, &scheme, &y0, &model, opts)?;
    let mut csv = Vec::new();
    export::write_stability_csv(&mut csv, &report)?;

    let mut s = String::new();
    writeln!(s, "operator: {}", op.id())?;
    writeln!(s, "scheme: {}", scheme_line(&scheme))?;
    writeln!(s, "perturbation: {model}")?;
    writeln!(s, "verdict: {}", report.verdict)?;
    writeln!(s, "eps_tail: {}", format_float(report.eps_tail))?;
    writeln!(s, "y_tail: {}", format_float(report.y_tail))?;
    writeln!(s, "sigma: {}", opt(report.sigma))?;
    writeln!(s, "seed: {}", report.seed.map_or("n/a".into(), |v| v.to_string()))?;
    writeln!(s, "converse_violation: {}", report.converse_violation)?;
    if !report.unperturbed_converged {
        writeln!(s, "conditional: the unperturbed run did not converge within {} steps", opts.n_steps)?;
    }
    if report.diverged {
        writeln!(s, "diverged: true")?;
    }
    if let Some(sig) = report.sigma.filter(|v| (0.0..1.0).contains(v)) {
        if !report.diverged {
            let env = envelope_violation(&report, sig, 1e-8)?;
            let conv = converse_inequality_violation(&report, sig, 1e-8);
            writeln!(s, "envelope: {}", env.map_or("holds".into(), |n| format!("fails at n={n}")))?;
            writeln!(s, "converse_inequality: {}", conv.map_or("holds".into(), |n| format!("fails at n={n}")))?;
        }
    }
    let status = match report.verdict {
        Verdict::Violation => Status::Violation,
        _ if report.converse_violation => Status::Violation,
        Verdict::HypothesisFailed => Status::HypothesisFailed,
        Verdict::StableConsistent => Status::Ok,
    };
    Ok(Outcome {
        status,
        csv,
        summary: s,
    })
}

pub fn cmd_list_operators() -> Result<Outcome> {
    let mut csv = Vec::new();
    export::write_corpus_csv(&mut csv, &corpus::table())?;
    Ok(Outcome {
        status: Status::Ok,
        csv,
        summary: format!("{} operators\n", corpus::IDS.len()),
    })
}

pub fn cmd_check_operator(cfg: &ExperimentConfig) -> Result<Outcome> {
    cfg.check_action("check-operator")?;
    let op = cfg.operator()?;
    let k = op
        .constants()
        .ok_or_else(|| anyhow!("Operator constants: `{}` declares no contractive class to check", op.id()))?;
    let seed = cfg.seed.unwrap_or(0);
    let n = cfg.samples.unwrap_or(DEFAULT_SAMPLES);
    let tol = cfg.tol.unwrap_or(DEFAULT_TOL);
    let max_power = cfg.max_power.unwrap_or(DEFAULT_MAX_POWER);

    let mut reports: Vec<ConditionReport> = Condition::ALL
        .iter()
        .map(|c| check_condition(&op, *c, UniformPairs::for_operator(&op, seed), n, tol))
        .collect::<kirk_iter::Result<_>>()?;
    reports.push(verify_lemma2(&op, UniformPairs::for_operator(&op, seed), n, max_power, tol)?);

    let mut out = csv::Writer::from_writer(Vec::new());
    out.write_record(["check", "samples", "violations", "satisfied", "max_excess"])?;
    let mut s = String::new();
    writeln!(s, "operator: {}", op.id())?;
    writeln!(
        s,
        "declared: {} (a={}, L={}, phi={})",
        op.class().map_or("none".into(), |c| c.to_string()),
        k.a,
        k.l,
        k.phi
    )?;
    for r in &reports {
        let excess = r.violations.iter().map(|v| v.lhs - v.rhs).fold(f64::NEG_INFINITY, f64::max);
        let excess = if r.violations.is_empty() { String::new() } else { format_float(excess) };
        out.write_record([
            r.check.to_string(),
            r.samples_tested.to_string(),
            r.violations.len().to_string(),
            r.satisfied.to_string(),
            excess,
        ])?;
        writeln!(
            s,
            "{:<28} {:>8} samples {:>8} violations",
            r.check.to_string(),
            r.samples_tested,
            r.violations.len()
        )?;
    }
    let csv = out.into_inner().map_err(|e| anyhow!("csv buffer: {e}"))?;

    // q must be the only fixed point among Picard limits from sampled starts
    if let Some(q) = op.fixed_point() {
        let picard = kirk_iter::schemes::specialize(&kirk_iter::schemes::ClassicScheme::Picard)?;
        let mut candidates = vec![q.clone()];
        for (x, _) in UniformPairs::for_operator(&op, seed).take(16) {
            let t = run(&op, &picard, &x, RunOptions { max_iter: 500, ..Default::default() })?;
            candidates.push(t.last().clone());
        }
        match unique_fixed_point(&op, &candidates, 1e-8)? {
            Some(found) => writeln!(s, "fixed point: {found}")?,
            None => writeln!(s, "fixed point: none among candidates")?,
        }
    }

    let declared_ok = reports
        .iter()
        .filter(|r| match r.check {
            kirk_iter::operators::Check::Condition(c) => Some(c) == op.class(),
            kirk_iter::operators::Check::IteratedPower { .. } => true,
        })
        .all(|r| r.satisfied);
    writeln!(s, "declared class and iterated-power bound: {}", if declared_ok { "hold" } else { "VIOLATED" })?;
    Ok(Outcome {
        status: if declared_ok { Status::Ok } else { Status::Violation },
        csv,
        summary: s,
    })
}

struct CompareRow {
    name: String,
    family: String,
    iterations: usize,
    stop_reason: StopReason,
    final_error: Option<f64>,
    rate: Option<f64>,
    sigma: Option<f64>,
}

pub fn cmd_compare(cfg: &ExperimentConfig) -> Result<Outcome> {
    cfg.check_action("compare")?;
    if cfg.schemes.len() < 2 {
        bail!("ExperimentConfig schemes: compare needs at least two `[[schemes]]` entries");
    }
    let op = cfg.operator()?;
    let x0: Vector = cfg.x0(&op)?;
    let resolved: Vec<(String, SchemeConfig)> = cfg
        .schemes
        .iter()
        .enumerate()
        .map(|(i, d)| {
            d.resolve()
                .map(|s| (d.label(), s))
                .map_err(|e| anyhow!("scheme #{} ({}): {e}", i + 1, d.label()))
        })
        .collect::<Result<_>>()?;
    let opts = run_options(cfg);

    let rows: Vec<CompareRow> = resolved
        .par_iter()
        .map(|(name, scheme)| -> Result<CompareRow> {
            let t = run(&op, scheme, &x0, opts)?;
            Ok(CompareRow {
                name: name.clone(),
                family: scheme.family().to_string(),
                iterations: t.iterations,
                stop_reason: t.stop_reason,
                final_error: t.final_error(),
                rate: fit(&t).map(|r| r.fitted_rate),
                sigma: sigma_sup(&op, scheme, cfg.a, t.iterations)?,
            })
        })
        .collect::<Result<_>>()?;

    let mut out = csv::Writer::from_writer(Vec::new());
    out.write_record(["scheme", "family", "iterations", "stop_reason", "final_error", "fitted_rate", "sigma"])?;
    let f = |v: Option<f64>| v.map(format_float).unwrap_or_default();
    for r in &rows {
        out.write_record([
            r.name.clone(),
            r.family.clone(),
            r.iterations.to_string(),
            r.stop_reason.to_string(),
            f(r.final_error),
            f(r.rate),
            f(r.sigma),
        ])?;
    }
    let csv = out.into_inner().map_err(|e| anyhow!("csv buffer: {e}"))?;

    let mut s = String::new();
    let w = rows.iter().map(|r| r.name.len()).max().unwrap_or(6).max(6);
    writeln!(
        s,
        "{:<w$}  {:<15} {:>10}  {:<13} {:>12} {:>12} {:>12}",
        "scheme", "family", "iterations", "stop_reason", "final_error", "fitted_rate", "sigma"
    )?;
    let g = |v: Option<f64>| v.map(|v| format!("{v:.6e}")).unwrap_or_else(|| "n/a".into());
    for r in &rows {
        writeln!(
            s,
            "{:<w$}  {:<15} {:>10}  {:<13} {:>12} {:>12} {:>12}",
            r.name,
            r.family,
            r.iterations,
            r.stop_reason.to_string(),
            g(r.final_error),
            r.rate.map(|v| format!("{v:.6}")).unwrap_or_else(|| "n/a".into()),
            r.sigma.map(|v| format!("{v:.6}")).unwrap_or_else(|| "n/a".into()),
        )?;
    }
    let status = if rows.iter().any(|r| r.stop_reason == StopReason::Diverged) {
        Status::Diverged
    } else if rows.iter().any(|r| r.stop_reason == StopReason::MaxIter) {
        Status::MaxIter
    } else {
        Status::Ok
    };
    Ok(Outcome {
        status,
        csv,
        summary: s,
    })
}
