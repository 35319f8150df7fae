use std::ops::Range;

use crate::error::{Error, Result};
use crate::schemes::IterationTrace;

/// Least-squares fit of `ln err_n` against `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct RateEstimate {
    /// `exp(slope)`: the fitted per-step error ratio.
    pub fitted_rate: f64,
    pub window: Range<usize>,
    pub r_squared: f64,
}

/// Default window: everything after the first 10% of the errors.
pub fn default_window(len: usize) -> Range<usize> {
    len / 10..len
}

/// Fits the rate over `window` (default: [`default_window`]).
///
/// A zero error inside the window truncates it just before that index.
pub fn estimate_rate_from_errors(errors: &[f64], window: Option<Range<usize>>) -> Result<RateEstimate> {
    let mut w = window.unwrap_or_else(|| default_window(errors.len()));
    w.end = w.end.min(errors.len());
    if let Some(z) = errors[w.start.min(w.end)..w.end].iter().position(|e| !(*e > 0.0)) {
        w.end = w.start + z;
    }
    if w.end < w.start + 2 {
        return Err(Error::invariant(
            "rate window",
            format!("need at least two positive errors, window is {}..{}", w.start, w.end),
        ));
    }
    let pts: Vec<(f64, f64)> = (w.clone()).map(|n| (n as f64, errors[n].ln())).collect();
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let ss_res: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let r_squared = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    Ok(RateEstimate {
        fitted_rate: slope.exp(),
        window: w,
        r_squared,
    })
}

/// Fits the rate of a trace's true errors.
pub fn estimate_rate(trace: &IterationTrace, window: Option<Range<usize>>) -> Result<RateEstimate> {
    let errors = trace
        .errors
        .as_ref()
        .ok_or_else(|| Error::invariant("rate window", "the trace has no known-fixed-point errors"))?;
    estimate_rate_from_errors(errors, window)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_geometric() {
        let e: Vec<f64> = (0..60).map(|n| 0.75f64.powi(n)).collect();
        let r = estimate_rate_from_errors(&e, None).unwrap();
        assert!((r.fitted_rate - 0.75).abs() < 1e-12);
        assert!((r.r_squared - 1.0).abs() < 1e-12);
        assert_eq!(r.window, 6..60);
    }

    #[test]
    fn constant_errors() {
        let r = estimate_rate_from_errors(&[0.3; 20], None).unwrap();
        assert_eq!(r.fitted_rate, 1.0);
        assert_eq!(r.r_squared, 1.0);
    }

    #[test]
    fn zero_error_shrinks_window() {
        let mut e: Vec<f64> = (0..30).map(|n| 0.5f64.powi(n)).collect();
        e[20] = 0.0;
        let r = estimate_rate_from_errors(&e, Some(0..30)).unwrap();
        assert_eq!(r.window, 0..20);
        assert!((r.fitted_rate - 0.5).abs() < 1e-12);
    }

    #[test]
    fn empty_window_is_an_error() {
        assert!(estimate_rate_from_errors(&[], None).is_err());
        assert!(estimate_rate_from_errors(&[1.0, 0.0, 0.0], Some(0..3)).is_err());
    }
}
