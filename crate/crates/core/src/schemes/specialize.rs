use crate::error::Result;

use super::weights::{WeightRow, WeightSchedule};
use super::{Family, SchemeConfig};

/// Named classical schemes, each realized as a parameter setting of the
/// Kirk-multistep or Kirk-SP engine.
///
/// Two-point schedules hold rows `(1 − θ_n, θ_n)`.
#[derive(Debug, Clone, PartialEq)]
pub enum ClassicScheme {
    /// `x' = Tx`. Needs a zero anchor weight, so anchor enforcement is off.
    Picard,
    /// Mann with constant `λ`.
    Krasnoselskij { lambda: f64 },
    Mann { alpha: WeightSchedule },
    Ishikawa { alpha: WeightSchedule, beta: WeightSchedule },
    Noor { alpha: WeightSchedule, beta: WeightSchedule, gamma: WeightSchedule },
    /// Three-level scheme anchored on the level below.
    Sp { alpha: WeightSchedule, beta: WeightSchedule, gamma: WeightSchedule },
    /// Two-level scheme anchored on the level below.
    Thianwan { alpha: WeightSchedule, beta: WeightSchedule },
    /// Constant weights on `T^0..T^s`.
    Kirk { alpha: WeightRow },
    KirkMann { alpha: WeightSchedule },
    KirkIshikawa { alpha: WeightSchedule, beta: WeightSchedule },
    KirkNoor { alpha: WeightSchedule, beta1: WeightSchedule, beta2: WeightSchedule },
}

impl ClassicScheme {
    pub fn name(&self) -> &'static str {
        match self {
            ClassicScheme::Picard => "picard",
            ClassicScheme::Krasnoselskij { .. } => "krasnoselskij",
            ClassicScheme::Mann { .. } => "mann",
            ClassicScheme::Ishikawa { .. } => "ishikawa",
            ClassicScheme::Noor { .. } => "noor",
            ClassicScheme::Sp { .. } => "sp",
            ClassicScheme::Thianwan { .. } => "thianwan",
            ClassicScheme::Kirk { .. } => "kirk",
            ClassicScheme::KirkMann { .. } => "kirk-mann",
            ClassicScheme::KirkIshikawa { .. } => "kirk-ishikawa",
            ClassicScheme::KirkNoor { .. } => "kirk-noor",
        }
    }
}

fn cap(s: &WeightSchedule) -> usize {
    s.row_len().saturating_sub(1)
}

fn no_inner_step() -> WeightSchedule {
    WeightSchedule::Constant(WeightRow::new(vec![1.0, 0.0]).expect("valid row"))
}

fn identity() -> WeightSchedule {
    WeightSchedule::Constant(WeightRow::identity())
}

fn multistep(levels: Vec<WeightSchedule>) -> Result<SchemeConfig> {
    let powers = levels.iter().map(cap).collect();
    let mut levels = levels.into_iter();
    let alpha = levels.next().expect("at least one level");
    SchemeConfig::new(Family::KirkMultistep, powers, alpha, levels.collect())
}

fn sp(alpha: WeightSchedule, beta: WeightSchedule, gamma: WeightSchedule) -> Result<SchemeConfig> {
    let powers = vec![cap(&alpha), cap(&beta), cap(&gamma)];
    SchemeConfig::new(Family::KirkSp, powers, alpha, vec![beta, gamma])
}

/// Builds the configuration that reproduces `scheme`.
///
/// Krasnoselskij with `λ = 1` is rejected: its anchor weight is zero. Use
/// [`ClassicScheme::Picard`], which switches anchor enforcement off.
pub fn specialize(scheme: &ClassicScheme) -> Result<SchemeConfig> {
    use ClassicScheme::*;
    match scheme.clone() {
        Picard => {
            let alpha = WeightSchedule::Constant(WeightRow::new(vec![0.0, 1.0])?);
            SchemeConfig::with_enforcement(Family::KirkMultistep, vec![1, 1], alpha, vec![no_inner_step()], false)
        }
        Krasnoselskij { lambda } => multistep(vec![WeightSchedule::two_point(lambda)?, no_inner_step()]),
        Mann { alpha } => multistep(vec![alpha, no_inner_step()]),
        Ishikawa { alpha, beta } => multistep(vec![alpha, beta]),
        Noor { alpha, beta, gamma } => multistep(vec![alpha, beta, gamma]),
        Sp { alpha, beta, gamma } => sp(alpha, beta, gamma),
        Thianwan { alpha, beta } => sp(alpha, beta, identity()),
        Kirk { alpha } => multistep(vec![WeightSchedule::Constant(alpha), identity()]),
        KirkMann { alpha } => multistep(vec![alpha, identity()]),
        KirkIshikawa { alpha, beta } => multistep(vec![alpha, beta]),
        KirkNoor { alpha, beta1, beta2 } => multistep(vec![alpha, beta1, beta2]),
    }
}
