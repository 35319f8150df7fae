//! Kirk-type multistep fixed-point iterations on `R^d`.
//!
//! The crate has four layers:
//!
//! - [`operators`]: self-maps of `R^d` with declared contractive classes,
//!   randomized checkers for those classes, and a small operator corpus.
//! - [`schemes`]: the Kirk-multistep and Kirk-SP iteration engines, the
//!   classical multistep families they generalize, and the reductions of
//!   named schemes (Picard, Mann, Ishikawa, Noor, SP, ...) to engine
//!   settings.
//! - [`analysis`]: the contraction factor `σ`, the recursion envelope and
//!   rate fits.
//! - [`stability`]: perturbed sequences and their stability verdicts.
//!
//! ```
//! use kirk_iter::operators::corpus;
//! use kirk_iter::schemes::{run, specialize, ClassicScheme, RunOptions, WeightSchedule};
//! use kirk_iter::Vector;
//!
//! let op = corpus::get("affine-1d")?;
//! let cfg = specialize(&ClassicScheme::KirkMann {
//!     alpha: WeightSchedule::constant(vec![0.5, 0.5])?,
//! })?;
//! let trace = run(&op, &cfg, &Vector::scalar(3.0), RunOptions::default())?;
//! assert!(trace.final_error().unwrap() <= 1e-10);
//! # Ok::<(), kirk_iter::Error>(())
//! ```

pub mod analysis;
mod error;
pub mod export;
pub mod operators;
mod phi;
pub mod schemes;
pub mod stability;
pub mod testing;
mod vector;

pub use error::{Error, Result};
pub use phi::{PhiAxiom, PhiAxiomFailure, PhiAxiomReport, PhiFunction};
pub use vector::{Norm, Vector};
