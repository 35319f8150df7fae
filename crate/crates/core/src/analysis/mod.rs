//! Quantitative objects behind the convergence and stability results: the
//! contraction factor `σ`, the recursion envelope, the Ostrowski bound for
//! perturbed Picard iteration, and empirical rate fits.

mod bounds;
mod rate;
mod sigma;

pub use bounds::{lemma1_oracle, ostrowski_bound};
pub use rate::{default_window, estimate_rate, estimate_rate_from_errors, RateEstimate};
pub use sigma::{sigma, sup_sigma, verify_sigma_bound, SigmaBreakdown};
