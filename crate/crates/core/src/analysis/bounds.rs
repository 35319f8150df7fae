use crate::error::{Error, Result};
use crate::operators::Operator;
use crate::schemes::IterationTrace;
use crate::vector::Vector;

/// The extremal sequence `u_{n+1} = σu_n + ε_n`, `u_0` given.
///
/// Any non-negative sequence with `u_{n+1} ≤ σu_n + ε_n` stays below it.
/// Returns `eps.len() + 1` values.
pub fn lemma1_oracle(sigma: f64, u0: f64, eps: &[f64]) -> Result<Vec<f64>> {
    if !(0.0..1.0).contains(&sigma) {
        return Err(Error::invariant("recursion factor", format!("sigma must lie in [0, 1), got {sigma}")));
    }
    if let Some(e) = eps.iter().find(|e| !(**e >= 0.0)) {
        return Err(Error::invariant("recursion residuals", format!("residuals must be non-negative, got {e}")));
    }
    let mut out = Vec::with_capacity(eps.len() + 1);
    out.push(u0);
    let mut u = u0;
    for e in eps {
        u = sigma * u + e;
        out.push(u);
    }
    Ok(out)
}

/// Error bound for a perturbed Picard sequence under a Banach contraction
/// with constant `λ`:
///
/// ```text
/// ‖q − y_{n+1}‖ ≤ ‖q − x_{n+1}‖ + λ^{n+1}‖x_0 − y_0‖ + Σ_{i=0..n} λ^{n−i} ε_i,
/// ε_i = ‖y_{i+1} − T y_i‖.
/// ```
///
/// Entry `n` bounds `‖q − y_{n+1}‖`.
pub fn ostrowski_bound(op: &Operator, x_trace: &IterationTrace, y: &[Vector], lambda: f64) -> Result<Vec<f64>> {
    if !(0.0..1.0).contains(&lambda) {
        return Err(Error::invariant("Banach constant", format!("lambda must lie in [0, 1), got {lambda}")));
    }
    let q = op.require_fixed_point()?;
    let xs = &x_trace.points;
    let len = xs.len().min(y.len());
    if len < 2 {
        return Ok(Vec::new());
    }
    let d0 = op.dist(&xs[0], &y[0]);
    let mut out = Vec::with_capacity(len - 1);
    let mut tail = 0.0;
    for n in 0..len - 1 {
        let eps = op.dist(&y[n + 1], &op.apply(&y[n])?);
        tail = lambda * tail + eps;
        out.push(op.dist(q, &xs[n + 1]) + lambda.powi(n as i32 + 1) * d0 + tail);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::corpus;
    use crate::schemes::{run, specialize, ClassicScheme, RunOptions, StopRule};

    #[test]
    fn pure_geometric() {
        let u = lemma1_oracle(0.5, 1.0, &[0.0; 10]).unwrap();
        for (n, v) in u.iter().enumerate() {
            assert_eq!(*v, 0.5f64.powi(n as i32));
        }
    }

    #[test]
    fn decaying_residuals_against_closed_form() {
        let eps: Vec<f64> = (0..100).map(|n| 0.9f64.powi(n)).collect();
        let u = lemma1_oracle(0.5, 0.0, &eps).unwrap();
        for n in 1..=100usize {
            // u_n = Σ_{i<n} 0.5^{n−1−i} 0.9^i = (0.9^n − 0.5^n) / 0.4
            let closed = (0.9f64.powi(n as i32) - 0.5f64.powi(n as i32)) / 0.4;
            assert!((u[n] - closed).abs() <= 1e-12 * (1.0 + closed));
        }
        assert!(u[100] < 1e-4);
    }

    #[test]
    fn persistent_residuals_settle_at_a_floor() {
        let u = lemma1_oracle(0.5, 1.0, &[0.1; 200]).unwrap();
        assert!((u[200] - 0.2).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(lemma1_oracle(1.0, 1.0, &[]).is_err());
        assert!(lemma1_oracle(0.5, 1.0, &[0.1, -0.1]).is_err());
    }

    fn picard_trace(id: &str, x0: f64, steps: usize) -> (Operator, IterationTrace) {
        let op = corpus::get(id).unwrap();
        let cfg = specialize(&ClassicScheme::Picard).unwrap();
        let opts = RunOptions { tol: 1e-300, max_iter: steps, stop: StopRule::TrueError };
        let t = run(&op, &cfg, &Vector::scalar(x0), opts).unwrap();
        (op, t)
    }

    #[test]
    fn unperturbed_picard_is_tight() {
        let (op, t) = picard_trace("halving-1d", 1.0, 50);
        let b = ostrowski_bound(&op, &t, &t.points, 0.5).unwrap();
        for (n, v) in b.iter().enumerate() {
            assert_eq!(*v, t.errors.as_ref().unwrap()[n + 1]);
        }
    }

    #[test]
    fn shifted_start_is_tight() {
        let (op, t) = picard_trace("halving-1d", 1.0, 40);
        let y: Vec<Vector> = (0..=40).map(|n| Vector::scalar(2.0 * 0.5f64.powi(n))).collect();
        let b = ostrowski_bound(&op, &t, &y, 0.5).unwrap();
        for n in 0..40 {
            let lhs = 2.0 * 0.5f64.powi(n as i32 + 1);
            assert!((b[n] - lhs).abs() <= 1e-15, "n={n}");
        }
    }

    #[test]
    fn perturbed_stream_is_dominated() {
        let (op, t) = picard_trace("halving-1d", 1.0, 200);
        let mut y = vec![Vector::scalar(1.0)];
        for n in 0..200 {
            // alternating signs so the triangle inequality is strict after step 0
            let next = op.apply(&y[n]).unwrap()[0] + (-0.9f64).powi(n as i32);
            y.push(Vector::scalar(next));
        }
        let b = ostrowski_bound(&op, &t, &y, 0.5).unwrap();
        assert!((y[1][0].abs() - b[0]).abs() <= 1e-15);
        for n in 1..200 {
            assert!(y[n + 1][0].abs() < b[n], "n={n}");
        }
    }

    #[test]
    fn needs_lambda_below_one_and_q() {
        let (op, t) = picard_trace("halving-1d", 1.0, 5);
        assert!(ostrowski_bound(&op, &t, &t.points, 1.0).is_err());
        let free = Operator::new("free", 1, |x| vec![x[0] / 2.0]);
        assert!(ostrowski_bound(&free, &t, &t.points, 0.5).is_err());
    }
}
