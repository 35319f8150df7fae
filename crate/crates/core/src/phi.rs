//! Comparison functions `φ: R+ → R+` used by the contractive-like condition
//! `‖Tx − Ty‖ ≤ φ(‖x − Tx‖) + a‖x − y‖`.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "c", rename_all = "lowercase")]
pub enum PhiFunction {
    /// `u ↦ 0`
    Zero,
    /// `u ↦ c·u`
    Linear(f64),
    /// `u ↦ c·u / (1 + u)`
    Saturating(f64),
}

impl Default for PhiFunction {
    fn default() -> Self {
        PhiFunction::Zero
    }
}

impl PhiFunction {
    pub fn linear(c: f64) -> Result<Self> {
        check_coefficient(c)?;
        Ok(PhiFunction::Linear(c))
    }

    pub fn saturating(c: f64) -> Result<Self> {
        check_coefficient(c)?;
        Ok(PhiFunction::Saturating(c))
    }

    pub fn eval(&self, u: f64) -> f64 {
        match *self {
            PhiFunction::Zero => 0.0,
            PhiFunction::Linear(c) => c * u,
            PhiFunction::Saturating(c) => c * u / (1.0 + u),
        }
    }

    /// `φ^j(u)`: the `j`-fold composition, with `φ^0 = id`.
    pub fn iterate(&self, j: usize, u: f64) -> f64 {
        (0..j).fold(u, |v, _| self.eval(v))
    }

    /// Samples the comparison-function axioms on `n_samples` random draws.
    ///
    /// Scaling `φ(Lu) ≤ Lφ(u)` is sampled for `L ∈ [0, 10]`; failures with
    /// `L < 1` land in `warnings`, failures with `L ≥ 1` in `violations`.
    pub fn check_axioms<R: Rng>(&self, rng: &mut R, n_samples: usize) -> PhiAxiomReport {
        let mut report = PhiAxiomReport::default();
        if self.eval(0.0) != 0.0 {
            report.violations.push(PhiAxiomFailure {
                axiom: PhiAxiom::VanishesAtZero,
                u: 0.0,
                v: 0.0,
                lhs: self.eval(0.0),
                rhs: 0.0,
            });
        }
        for _ in 0..n_samples {
            let u: f64 = rng.gen_range(0.0..100.0);
            let v: f64 = rng.gen_range(0.0..100.0);
            let (lo, hi) = if u <= v { (u, v) } else { (v, u) };
            let mut fail = |axiom, lhs: f64, rhs: f64, warn: bool| {
                if lhs > rhs * (1.0 + 1e-12) + 1e-12 {
                    let f = PhiAxiomFailure { axiom, u, v, lhs, rhs };
                    if warn {
                        report.warnings.push(f);
                    } else {
                        report.violations.push(f);
                    }
                }
            };
            fail(PhiAxiom::Monotone, self.eval(lo), self.eval(hi), false);
            fail(PhiAxiom::Subadditive, self.eval(u + v), self.eval(u) + self.eval(v), false);
            let l: f64 = rng.gen_range(0.0..10.0);
            fail(PhiAxiom::Scaling, self.eval(l * u), l * self.eval(u), l < 1.0);
            report.samples += 1;
        }
        report
    }
}

fn check_coefficient(c: f64) -> Result<()> {
    if !(c.is_finite() && c >= 0.0) {
        return Err(Error::invariant(
            "PhiFunction coefficient",
            format!("coefficient must be finite and non-negative, got {c}"),
        ));
    }
    Ok(())
}

impl fmt::Display for PhiFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PhiFunction::Zero => f.write_str("zero"),
            PhiFunction::Linear(c) => write!(f, "linear({c})"),
            PhiFunction::Saturating(c) => write!(f, "saturating({c})"),
        }
    }
}

impl std::str::FromStr for PhiFunction {
    type Err = Error;

    /// Parses `zero`, `linear(c)` or `saturating(c)`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "zero" {
            return Ok(PhiFunction::Zero);
        }
        let unknown = || Error::UnknownTag {
            what: "phi function",
            tag: s.to_string(),
        };
        let (name, rest) = s.split_once('(').ok_or_else(unknown)?;
        let arg = rest.strip_suffix(')').ok_or_else(unknown)?;
        let c: f64 = arg.trim().parse().map_err(|_| unknown())?;
        match name.trim() {
            "linear" => PhiFunction::linear(c),
            "saturating" => PhiFunction::saturating(c),
            _ => Err(unknown()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhiAxiom {
    VanishesAtZero,
    Monotone,
    Subadditive,
    Scaling,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhiAxiomFailure {
    pub axiom: PhiAxiom,
    pub u: f64,
    pub v: f64,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PhiAxiomReport {
    pub samples: usize,
    pub violations: Vec<PhiAxiomFailure>,
    pub warnings: Vec<PhiAxiomFailure>,
}

impl PhiAxiomReport {
    pub fn satisfied(&self) -> bool {
        self.violations.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn all_kinds_satisfy_the_axioms() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for phi in [
            PhiFunction::Zero,
            PhiFunction::Linear(0.0),
            PhiFunction::Linear(2.5),
            PhiFunction::Saturating(1.0),
            PhiFunction::Saturating(0.3),
        ] {
            let report = phi.check_axioms(&mut rng, 5_000);
            assert!(report.satisfied(), "{phi}: {:?}", report.violations.first());
        }
    }

    #[test]
    fn saturating_scaling_below_one_is_only_a_warning() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let report = PhiFunction::Saturating(1.0).check_axioms(&mut rng, 2_000);
        assert!(report.satisfied());
        assert!(!report.warnings.is_empty());
        assert!(report.warnings.iter().all(|w| w.axiom == PhiAxiom::Scaling));
    }

    #[test]
    fn composition_is_not_a_power() {
        let phi = PhiFunction::Saturating(1.0);
        // φ(1) = 1/2, φ(1/2) = 1/3
        assert_eq!(phi.iterate(0, 1.0), 1.0);
        assert_eq!(phi.iterate(1, 1.0), 0.5);
        assert!((phi.iterate(2, 1.0) - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(PhiFunction::Linear(0.5).iterate(3, 8.0), 1.0);
    }

    #[test]
    fn parse_round_trip() {
        for s in ["zero", "linear(0.5)", "saturating(2)"] {
            let phi: PhiFunction = s.parse().unwrap();
            assert_eq!(phi.to_string().parse::<PhiFunction>().unwrap(), phi);
        }
        assert!("quadratic(1)".parse::<PhiFunction>().is_err());
        assert!("linear(-1)".parse::<PhiFunction>().is_err());
    }
}
