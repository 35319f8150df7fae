//! The per-step contraction factor `σ`.
//!
//! For a Kirk-multistep configuration with rows `α, β¹, …, β^{k−1}` and
//! contraction constant `a`, write `A_0 = Σ_{i≥1} α_i a^i` and
//! `A_p = Σ_{i≥1} β^p_i a^i`. Then
//!
//! ```text
//! σ = α_0 + A_0·β¹_0 + A_0·A_1·β²_0 + … + A_0⋯A_{k−3}·β^{k−2}_0
//!       + A_0⋯A_{k−2}·Σ_{i≥0} β^{k−1}_i a^i
//! ```
//!
//! and every run satisfies `‖x_{n+1} − q‖ ≤ σ‖x_n − q‖`. Kirk-SP levels are
//! full combinations, so there `σ` is the product of the three full sums
//! `Σ_{i≥0} w_i a^i`.
//!
//! The classical families are measured through their Kirk forms: the
//! `x`-anchored family is Kirk-multistep with unit powers, and the
//! below-anchored family is a chain of full combinations like Kirk-SP, at
//! any depth.

use crate::error::{Error, Result};
use crate::schemes::{Family, SchemeConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct SigmaBreakdown {
    pub sigma: f64,
    /// Additive terms (multistep forms) or the single product (chained forms).
    pub terms: Vec<f64>,
    /// The `A_p` factors followed by the last level's full sum (multistep
    /// forms), or every level's full sum (chained forms).
    pub inner_sums: Vec<f64>,
}

impl SigmaBreakdown {
    /// `σ ∈ [0, 1)`.
    pub fn contracts(&self) -> bool {
        (0.0..1.0).contains(&self.sigma)
    }
}

fn check_a(a: f64) -> Result<()> {
    if !(0.0..1.0).contains(&a) {
        return Err(Error::invariant("sigma contraction constant", format!("a must lie in [0, 1), got {a}")));
    }
    Ok(())
}

/// `σ` at step `n` for contraction constant `a`.
pub fn sigma(cfg: &SchemeConfig, a: f64, n: usize) -> Result<SigmaBreakdown> {
    check_a(a)?;
    let rows: Vec<_> = (0..cfg.depth()).map(|l| cfg.schedule(l).row(n)).collect();
    let k = rows.len();
    match cfg.family() {
        Family::KirkMultistep | Family::MultistepRs => {
            let mut inner_sums: Vec<f64> = rows[..k - 1].iter().map(|r| r.power_sum(a, 1)).collect();
            let last = rows[k - 1].power_sum(a, 0);
            let mut terms = Vec::with_capacity(k);
            terms.push(rows[0].anchor());
            let mut prefix = 1.0;
            for m in 1..k - 1 {
                prefix *= inner_sums[m - 1];
                terms.push(prefix * rows[m].anchor());
            }
            prefix *= inner_sums[k - 2];
            terms.push(prefix * last);
            inner_sums.push(last);
            Ok(SigmaBreakdown {
                sigma: terms.iter().sum(),
                terms,
                inner_sums,
            })
        }
        Family::KirkSp | Family::MultistepAlt => {
            let inner_sums: Vec<f64> = rows.iter().map(|r| r.power_sum(a, 0)).collect();
            let sigma = inner_sums.iter().product();
            Ok(SigmaBreakdown {
                sigma,
                terms: vec![sigma],
                inner_sums,
            })
        }
    }
}

/// Largest `σ` over steps `0..n_steps` (at least step 0).
pub fn sup_sigma(cfg: &SchemeConfig, a: f64, n_steps: usize) -> Result<f64> {
    let mut best = f64::NEG_INFINITY;
    for n in 0..n_steps.max(1) {
        best = best.max(sigma(cfg, a, n)?.sigma);
    }
    Ok(best)
}

/// `true` iff `σ ∈ [0, 1)` at every step in `0..n_steps`.
pub fn verify_sigma_bound(cfg: &SchemeConfig, a: f64, n_steps: usize) -> bool {
    (0..n_steps.max(1)).all(|n| sigma(cfg, a, n).map(|b| b.contracts()).unwrap_or(false))
}
