//! Convex weight rows and the per-step schedules that produce them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on `Σ w_i = 1`.
pub const SIMPLEX_TOL: f64 = 1e-12;

/// Convex weights `w_0..w_s` on `T^0, …, T^s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct WeightRow(Vec<f64>);

impl WeightRow {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::invariant("WeightRow simplex", "a weight row needs at least one entry"));
        }
        if let Some((i, w)) = weights
            .iter()
            .enumerate()
            .find(|(_, w)| !(w.is_finite() && (0.0..=1.0).contains(*w)))
        {
            return Err(Error::invariant(
                "WeightRow simplex",
                format!("weight {i} is {w}, every weight must lie in [0, 1]"),
            ));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > SIMPLEX_TOL {
            return Err(Error::invariant(
                "WeightRow simplex",
                format!("weights must sum to 1, got {sum}"),
            ));
        }
        Ok(WeightRow(weights))
    }

    /// `(1 − θ, θ)`
    pub fn two_point(theta: f64) -> Result<Self> {
        Self::new(vec![1.0 - theta, theta])
    }

    /// The single-entry row `(1)`.
    pub fn identity() -> Self {
        WeightRow(vec![1.0])
    }

    /// `len` equal weights.
    pub fn uniform(len: usize) -> Result<Self> {
        if len == 0 {
            return Err(Error::invariant("WeightRow simplex", "a weight row needs at least one entry"));
        }
        Self::new(vec![1.0 / len as f64; len]).or_else(|_| {
            // 1/len summed len times can drift past the tolerance for large len
            let mut w = vec![1.0 / len as f64; len];
            let rest: f64 = w[1..].iter().sum();
            w[0] = 1.0 - rest;
            Self::new(w)
        })
    }

    pub fn weights(&self) -> &[f64] {
        &self.0
    }

    /// Highest power this row weights, `s = len − 1`.
    pub fn max_power(&self) -> usize {
        self.0.len() - 1
    }

    /// The anchor weight `w_0`.
    pub fn anchor(&self) -> f64 {
        self.0[0]
    }

    /// `Σ_{i≥from} w_i a^i`
    pub fn power_sum(&self, a: f64, from: usize) -> f64 {
        self.0
            .iter()
            .enumerate()
            .skip(from)
            .map(|(i, w)| w * a.powi(i as i32))
            .sum()
    }
}

impl TryFrom<Vec<f64>> for WeightRow {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        WeightRow::new(v)
    }
}

impl From<WeightRow> for Vec<f64> {
    fn from(r: WeightRow) -> Self {
        r.0
    }
}

/// Closed-form schedules.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum GeneratedRule {
    /// `(1 − θ_n, θ_n)` with `θ_n = c / (n + 1)^power`, `c ∈ (0, 1]`, `power ≥ 0`.
    Decay { c: f64, power: f64 },
    /// `len` equal weights at every step.
    Uniform { len: usize },
}

impl GeneratedRule {
    fn validate(&self) -> Result<()> {
        match *self {
            GeneratedRule::Decay { c, power } => {
                if !(c > 0.0 && c <= 1.0) || !(power.is_finite() && power >= 0.0) {
                    return Err(Error::invariant(
                        "WeightSchedule generated rule",
                        format!("decay needs c in (0, 1] and power >= 0, got c={c}, power={power}"),
                    ));
                }
            }
            GeneratedRule::Uniform { len } => {
                if len == 0 {
                    return Err(Error::invariant("WeightSchedule generated rule", "uniform needs len >= 1"));
                }
            }
        }
        Ok(())
    }

    fn row(&self, n: usize) -> WeightRow {
        match *self {
            GeneratedRule::Decay { c, power } => {
                let theta = c / ((n + 1) as f64).powf(power);
                WeightRow(vec![1.0 - theta, theta])
            }
            GeneratedRule::Uniform { len } => WeightRow::uniform(len).expect("len checked"),
        }
    }

    fn row_len(&self) -> usize {
        match *self {
            GeneratedRule::Decay { .. } => 2,
            GeneratedRule::Uniform { len } => len,
        }
    }

    /// Smallest anchor weight the rule ever produces.
    fn min_anchor(&self) -> f64 {
        match *self {
            GeneratedRule::Decay { c, .. } => 1.0 - c,
            GeneratedRule::Uniform { len } => 1.0 / len as f64,
        }
    }
}

/// Weight rows indexed by the step number `n`.
///
/// Tabulated schedules clamp: steps past the end of the table reuse the last
/// row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightSchedule {
    Constant(WeightRow),
    Tabulated(Vec<WeightRow>),
    Generated(GeneratedRule),
}

impl WeightSchedule {
    pub fn constant(weights: Vec<f64>) -> Result<Self> {
        Ok(WeightSchedule::Constant(WeightRow::new(weights)?))
    }

    /// Constant `(1 − θ, θ)`.
    pub fn two_point(theta: f64) -> Result<Self> {
        Ok(WeightSchedule::Constant(WeightRow::two_point(theta)?))
    }

    pub fn tabulated(rows: Vec<WeightRow>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::invariant("WeightSchedule table", "a tabulated schedule needs at least one row"));
        }
        let len = rows[0].weights().len();
        if rows.iter().any(|r| r.weights().len() != len) {
            return Err(Error::invariant("WeightSchedule table", "all tabulated rows must have the same length"));
        }
        Ok(WeightSchedule::Tabulated(rows))
    }

    pub fn generated(rule: GeneratedRule) -> Result<Self> {
        rule.validate()?;
        Ok(WeightSchedule::Generated(rule))
    }

    /// Row used at step `n`.
    pub fn row(&self, n: usize) -> WeightRow {
        match self {
            WeightSchedule::Constant(r) => r.clone(),
            WeightSchedule::Tabulated(rows) => rows[n.min(rows.len() - 1)].clone(),
            WeightSchedule::Generated(rule) => rule.row(n),
        }
    }

    /// Row length shared by every step.
    pub fn row_len(&self) -> usize {
        match self {
            WeightSchedule::Constant(r) => r.weights().len(),
            WeightSchedule::Tabulated(rows) => rows[0].weights().len(),
            WeightSchedule::Generated(rule) => rule.row_len(),
        }
    }

    /// Smallest anchor weight over all steps.
    pub fn min_anchor(&self) -> f64 {
        match self {
            WeightSchedule::Constant(r) => r.anchor(),
            WeightSchedule::Tabulated(rows) => rows.iter().map(WeightRow::anchor).fold(f64::INFINITY, f64::min),
            WeightSchedule::Generated(rule) => rule.min_anchor(),
        }
    }

    /// Re-checks rows and structure; needed after deserialization of tables
    /// and generated rules.
    pub fn validate(&self) -> Result<()> {
        match self {
            WeightSchedule::Constant(r) => WeightRow::new(r.0.clone()).map(|_| ()),
            WeightSchedule::Tabulated(rows) => {
                for r in rows {
                    WeightRow::new(r.0.clone())?;
                }
                WeightSchedule::tabulated(rows.clone()).map(|_| ())
            }
            WeightSchedule::Generated(rule) => rule.validate(),
        }
    }

    /// Number of distinct rows: 1 for constant and generated-uniform, the
    /// table length for tabulated, unbounded (`None`) for decaying rules.
    pub fn distinct_rows(&self) -> Option<usize> {
        match self {
            WeightSchedule::Constant(_) => Some(1),
            WeightSchedule::Tabulated(rows) => Some(rows.len()),
            WeightSchedule::Generated(GeneratedRule::Uniform { .. }) => Some(1),
            WeightSchedule::Generated(GeneratedRule::Decay { .. }) => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simplex_is_enforced() {
        assert!(WeightRow::new(vec![0.5, 0.5]).is_ok());
        let err = WeightRow::new(vec![0.5, 0.4]).unwrap_err();
        assert!(err.to_string().contains("WeightRow simplex"), "{err}");
        assert!(WeightRow::new(vec![1.2, -0.2]).is_err());
        assert!(WeightRow::new(vec![]).is_err());
        assert!(WeightRow::new(vec![f64::NAN, 1.0]).is_err());
    }

    #[test]
    fn uniform_rows_sum_to_one() {
        for len in 1..50 {
            let r = WeightRow::uniform(len).unwrap();
            assert_eq!(r.weights().len(), len);
        }
    }

    #[test]
    fn tabulated_clamps_to_last_row() {
        let s = WeightSchedule::tabulated(vec![
            WeightRow::two_point(0.1).unwrap(),
            WeightRow::two_point(0.2).unwrap(),
        ])
        .unwrap();
        assert_eq!(s.row(0).weights()[1], 0.1);
        assert_eq!(s.row(1).weights()[1], 0.2);
        assert_eq!(s.row(1000).weights()[1], 0.2);
        assert_eq!(s.min_anchor(), 0.8);
    }

    #[test]
    fn tabulated_rows_must_agree_in_length() {
        let rows = vec![WeightRow::two_point(0.1).unwrap(), WeightRow::uniform(3).unwrap()];
        assert!(WeightSchedule::tabulated(rows).is_err());
        assert!(WeightSchedule::tabulated(vec![]).is_err());
    }

    #[test]
    fn decay_rule_rows() {
        let s = WeightSchedule::generated(GeneratedRule::Decay { c: 0.5, power: 1.0 }).unwrap();
        assert_eq!(s.row(0).weights(), &[0.5, 0.5]);
        assert_eq!(s.row(3).weights(), &[0.875, 0.125]);
        assert_eq!(s.min_anchor(), 0.5);
        assert!(WeightSchedule::generated(GeneratedRule::Decay { c: 1.5, power: 1.0 }).is_err());
        assert!(WeightSchedule::generated(GeneratedRule::Uniform { len: 0 }).is_err());
    }

    #[test]
    fn power_sums() {
        let r = WeightRow::new(vec![0.4, 0.3, 0.3]).unwrap();
        assert!((r.power_sum(0.5, 1) - 0.225).abs() < 1e-15);
        assert!((r.power_sum(0.5, 0) - 0.625).abs() < 1e-15);
    }
}
