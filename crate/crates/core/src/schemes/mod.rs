//! Iteration schemes built from convex combinations of operator powers.
//!
//! Four families share one configuration type:
//!
//! * [`Family::KirkMultistep`]: `x' = α_0 x + Σ_{i≥1} α_i T^i y¹`,
//!   `y^p = β^p_0 x + Σ_{i≥1} β^p_i T^i y^{p+1}` for `p = 1..k−2`, and
//!   `y^{k−1} = Σ_{i≥0} β^{k−1}_i T^i x`. Inner levels anchor on `x`.
//! * [`Family::KirkSp`]: three levels, each a full combination
//!   `Σ_{i≥0} w_i T^i (previous level)`, starting from `x`.
//! * [`Family::MultistepRs`]: the classical multistep scheme whose levels
//!   all anchor on `x`; Mann, Ishikawa and Noor are its `k = 2, 3` cases.
//! * [`Family::MultistepAlt`]: the variant whose levels anchor on the level
//!   below; Thianwan (`k = 2`) and SP (`k = 3`).
//!
//! The step index `n` is always passed in explicitly, so schedules are pure
//! lookups and a configuration never carries a cursor.

mod run;
mod specialize;
mod step;
pub mod weights;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use run::{run, IterationTrace, RunOptions, StopReason, StopRule, DIVERGENCE_THRESHOLD};
pub use specialize::{specialize, ClassicScheme};
pub use step::{kirk_multistep_step, kirk_sp_step, multistep_alt_step, multistep_rs_step, step};
pub use weights::{GeneratedRule, WeightRow, WeightSchedule};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    KirkMultistep,
    KirkSp,
    MultistepRs,
    MultistepAlt,
}

impl Family {
    pub fn tag(self) -> &'static str {
        match self {
            Family::KirkMultistep => "kirk-multistep",
            Family::KirkSp => "kirk-sp",
            Family::MultistepRs => "multistep-rs",
            Family::MultistepAlt => "multistep-alt",
        }
    }

    pub fn is_kirk(self) -> bool {
        matches!(self, Family::KirkMultistep | Family::KirkSp)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [Family::KirkMultistep, Family::KirkSp, Family::MultistepRs, Family::MultistepAlt]
            .into_iter()
            .find(|f| f.tag() == s)
            .ok_or_else(|| Error::UnknownTag {
                what: "scheme family",
                tag: s.to_string(),
            })
    }
}

/// A validated scheme: family, depth `k = powers.len()`, power caps
/// `s_1 ≥ … ≥ s_k`, the top-level schedule `alpha` and the `k − 1` inner
/// schedules `betas` (`betas[p − 1]` is level `p`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSchemeConfig", into = "RawSchemeConfig")]
pub struct SchemeConfig {
    family: Family,
    powers: Vec<usize>,
    alpha: WeightSchedule,
    betas: Vec<WeightSchedule>,
    enforce_alpha0_nonzero: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSchemeConfig {
    family: Family,
    powers: Vec<usize>,
    alpha: WeightSchedule,
    betas: Vec<WeightSchedule>,
    #[serde(default = "default_enforce")]
    enforce_alpha0_nonzero: bool,
}

fn default_enforce() -> bool {
    true
}

impl TryFrom<RawSchemeConfig> for SchemeConfig {
    type Error = Error;

    fn try_from(raw: RawSchemeConfig) -> Result<Self> {
        SchemeConfig::new(raw.family, raw.powers, raw.alpha, raw.betas)?
            .with_anchor_enforcement(raw.enforce_alpha0_nonzero)
    }
}

impl From<SchemeConfig> for RawSchemeConfig {
    fn from(c: SchemeConfig) -> Self {
        RawSchemeConfig {
            family: c.family,
            powers: c.powers,
            alpha: c.alpha,
            betas: c.betas,
            enforce_alpha0_nonzero: c.enforce_alpha0_nonzero,
        }
    }
}

impl SchemeConfig {
    /// Builds and validates a configuration with anchor enforcement on.
    pub fn new(
        family: Family,
        powers: Vec<usize>,
        alpha: WeightSchedule,
        betas: Vec<WeightSchedule>,
    ) -> Result<Self> {
        Self::with_enforcement(family, powers, alpha, betas, true)
    }

    /// Like [`SchemeConfig::new`] with an explicit anchor-enforcement flag.
    pub fn with_enforcement(
        family: Family,
        powers: Vec<usize>,
        alpha: WeightSchedule,
        betas: Vec<WeightSchedule>,
        enforce_alpha0_nonzero: bool,
    ) -> Result<Self> {
        let cfg = SchemeConfig {
            family,
            powers,
            alpha,
            betas,
            enforce_alpha0_nonzero,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Turns the non-zero anchor requirement on or off and revalidates.
    ///
    /// Switching it off is what lets Picard be expressed as a Kirk scheme;
    /// the convergence and stability guarantees no longer apply then.
    pub fn with_anchor_enforcement(mut self, enforce: bool) -> Result<Self> {
        self.enforce_alpha0_nonzero = enforce;
        self.validate()?;
        Ok(self)
    }

    pub fn family(&self) -> Family {
        self.family
    }

    /// Depth `k`.
    pub fn depth(&self) -> usize {
        self.powers.len()
    }

    pub fn powers(&self) -> &[usize] {
        &self.powers
    }

    pub fn alpha(&self) -> &WeightSchedule {
        &self.alpha
    }

    pub fn betas(&self) -> &[WeightSchedule] {
        &self.betas
    }

    pub fn enforces_anchor(&self) -> bool {
        self.enforce_alpha0_nonzero
    }

    /// Schedule of level `level` (0 is the top level `alpha`).
    pub fn schedule(&self, level: usize) -> &WeightSchedule {
        if level == 0 {
            &self.alpha
        } else {
            &self.betas[level - 1]
        }
    }

    /// Smallest anchor weight across every level and step.
    pub fn min_anchor(&self) -> f64 {
        (0..self.depth())
            .map(|l| self.schedule(l).min_anchor())
            .fold(f64::INFINITY, f64::min)
    }

    /// Number of steps after which every schedule repeats its last row, or
    /// `None` if some schedule changes forever.
    pub fn distinct_steps(&self) -> Option<usize> {
        (0..self.depth())
            .map(|l| self.schedule(l).distinct_rows())
            .try_fold(1, |m, d| d.map(|d| m.max(d)))
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.powers.len();
        if k < 2 {
            return Err(Error::invariant("SchemeConfig depth", format!("k must be at least 2, got {k}")));
        }
        if self.family == Family::KirkSp && k != 3 {
            return Err(Error::invariant(
                "SchemeConfig depth",
                format!("kirk-sp has exactly 3 levels, got {k}"),
            ));
        }
        if self.betas.len() != k - 1 {
            return Err(Error::invariant(
                "SchemeConfig schedules",
                format!("depth {k} needs {} beta schedules, got {}", k - 1, self.betas.len()),
            ));
        }
        if let Some(w) = self.powers.windows(2).find(|w| w[0] < w[1]) {
            return Err(Error::invariant(
                "SchemeConfig powers non-increasing",
                format!("powers {:?} increase from {} to {}", self.powers, w[0], w[1]),
            ));
        }
        for level in 0..k {
            let sched = self.schedule(level);
            sched.validate()?;
            let want = self.powers[level] + 1;
            if sched.row_len() != want {
                return Err(Error::invariant(
                    "SchemeConfig row length",
                    format!(
                        "level {level} has power cap {} so its rows need {want} weights, got {}",
                        self.powers[level],
                        sched.row_len()
                    ),
                ));
            }
        }
        match self.family {
            Family::MultistepRs | Family::MultistepAlt => {
                if self.powers.iter().any(|&s| s != 1) {
                    return Err(Error::invariant(
                        "SchemeConfig classical powers",
                        format!("{} uses only T^1, powers must all be 1, got {:?}", self.family, self.powers),
                    ));
                }
            }
            Family::KirkMultistep | Family::KirkSp => {
                if self.enforce_alpha0_nonzero {
                    for level in 0..k {
                        let m = self.schedule(level).min_anchor();
                        if m <= 0.0 {
                            let name = if level == 0 { "alpha".to_string() } else { format!("beta^{level}") };
                            return Err(Error::invariant(
                                "SchemeConfig anchor weight nonzero",
                                format!("{name} has anchor weight {m}; kirk schemes need w_0 > 0 on every level"),
                            ));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Parses a TOML document with the fields of this type and validates it.
    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::Parse(e.message().to_string()))
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Parse(e.to_string()))
    }
}
