use crate::error::{Error, Result};
use crate::operators::Operator;
use crate::vector::Vector;

use super::weights::WeightRow;
use super::{Family, SchemeConfig};

/// One step of whichever family `cfg` belongs to.
pub fn step(op: &Operator, cfg: &SchemeConfig, x: &Vector, n: usize) -> Result<Vector> {
    match cfg.family() {
        Family::KirkMultistep => kirk_multistep_step(op, cfg, x, n),
        Family::KirkSp => kirk_sp_step(op, cfg, x, n),
        Family::MultistepRs => multistep_rs_step(op, cfg, x, n),
        Family::MultistepAlt => multistep_alt_step(op, cfg, x, n),
    }
}

fn expect_family(cfg: &SchemeConfig, family: Family) -> Result<()> {
    if cfg.family() != family {
        return Err(Error::invariant(
            "SchemeConfig family",
            format!("expected {family}, got {}", cfg.family()),
        ));
    }
    Ok(())
}

fn finite(v: Vector, n: usize) -> Result<Vector> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite { step: n })
    }
}

/// `w_0·anchor + Σ_{i≥1} w_i T^i base`
fn anchored(op: &Operator, row: &WeightRow, anchor: &Vector, base: &Vector) -> Result<Vector> {
    let w = row.weights();
    let chain = op.power_chain(row.max_power(), base)?;
    let mut out = anchor.scale(w[0]);
    for (wi, ti) in w.iter().zip(&chain).skip(1) {
        out.axpy(*wi, ti);
    }
    Ok(out)
}

/// `Σ_{i≥0} w_i T^i base`
fn full(op: &Operator, row: &WeightRow, base: &Vector) -> Result<Vector> {
    anchored(op, row, base, base)
}

/// Kirk-multistep step. Inner levels `p = 1..k−2` anchor on `x`, not on the
/// level below; only the deepest level is a full combination of `T^i x`.
pub fn kirk_multistep_step(op: &Operator, cfg: &SchemeConfig, x: &Vector, n: usize) -> Result<Vector> {
    expect_family(cfg, Family::KirkMultistep)?;
    x.check_dim(op.dim())?;
    let k = cfg.depth();
    let mut y = full(op, &cfg.schedule(k - 1).row(n), x)?;
    for level in (1..k - 1).rev() {
        y = anchored(op, &cfg.schedule(level).row(n), x, &y)?;
    }
    finite(anchored(op, &cfg.alpha().row(n), x, &y)?, n)
}

/// Kirk-SP step: `y² = Σ β²_i T^i x`, `y¹ = Σ β¹_i T^i y²`, `x' = Σ α_i T^i y¹`.
pub fn kirk_sp_step(op: &Operator, cfg: &SchemeConfig, x: &Vector, n: usize) -> Result<Vector> {
    expect_family(cfg, Family::KirkSp)?;
    x.check_dim(op.dim())?;
    let mut y = x.clone();
    for level in (0..cfg.depth()).rev() {
        y = full(op, &cfg.schedule(level).row(n), &y)?;
    }
    finite(y, n)
}

fn theta(cfg: &SchemeConfig, level: usize, n: usize) -> f64 {
    cfg.schedule(level).row(n).weights()[1]
}

/// `(1 − θ)·anchor + θ·T(base)`
fn relax(op: &Operator, theta: f64, anchor: &Vector, base: &Vector) -> Result<Vector> {
    let tb = op.apply(base)?;
    Ok(anchor.scale(1.0 - theta).add(&tb.scale(theta)))
}

/// Classical multistep step, every level anchored on `x`:
/// `y^{k−1} = (1−β)x + βTx`, `y^i = (1−β^i)x + β^i T y^{i+1}`,
/// `x' = (1−α)x + αTy¹`.
pub fn multistep_rs_step(op: &Operator, cfg: &SchemeConfig, x: &Vector, n: usize) -> Result<Vector> {
    expect_family(cfg, Family::MultistepRs)?;
    x.check_dim(op.dim())?;
    let k = cfg.depth();
    let mut y = x.clone();
    for level in (0..k).rev() {
        y = relax(op, theta(cfg, level, n), x, &y)?;
    }
    finite(y, n)
}

/// Multistep variant anchored on the level below:
/// `y^{k−1} = (1−β)x + βTx`, `y^i = (1−β^i)y^{i+1} + β^i T y^{i+1}`,
/// `x' = (1−α)y¹ + αTy¹`.
pub fn multistep_alt_step(op: &Operator, cfg: &SchemeConfig, x: &Vector, n: usize) -> Result<Vector> {
    expect_family(cfg, Family::MultistepAlt)?;
    x.check_dim(op.dim())?;
    let mut y = x.clone();
    for level in (0..cfg.depth()).rev() {
        y = relax(op, theta(cfg, level, n), &y, &y)?;
    }
    finite(y, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::corpus;
    use crate::schemes::WeightSchedule;

    fn row(w: &[f64]) -> WeightSchedule {
        WeightSchedule::constant(w.to_vec()).unwrap()
    }

    fn halving() -> Operator {
        corpus::get("halving-1d").unwrap()
    }

    fn one() -> Vector {
        Vector::scalar(1.0)
    }

    #[test]
    fn kirk_multistep_two_levels_by_hand() {
        let cfg = SchemeConfig::new(Family::KirkMultistep, vec![1, 1], row(&[0.5, 0.5]), vec![row(&[0.5, 0.5])])
            .unwrap();
        // y¹ = 0.5·1 + 0.5·0.5 = 0.75; x' = 0.5·1 + 0.5·0.375
        assert_eq!(kirk_multistep_step(&halving(), &cfg, &one(), 0).unwrap(), Vector::scalar(0.6875));
    }

    #[test]
    fn kirk_mann_by_hand() {
        let cfg = SchemeConfig::new(Family::KirkMultistep, vec![1, 0], row(&[0.5, 0.5]), vec![row(&[1.0])]).unwrap();
        assert_eq!(kirk_multistep_step(&halving(), &cfg, &one(), 0).unwrap(), Vector::scalar(0.75));
    }

    #[test]
    fn kirk_multistep_inner_levels_anchor_on_x() {
        // k = 3, s = (1,1,1), all rows (0.5, 0.5), T x = x/2, x = 1:
        // y² = 0.5 + 0.25 = 0.75
        // y¹ = 0.5·x + 0.5·T y² = 0.5 + 0.1875 = 0.6875   (anchor x, not y²)
        // x' = 0.5 + 0.5·0.34375 = 0.671875
        let cfg = SchemeConfig::new(
            Family::KirkMultistep,
            vec![1, 1, 1],
            row(&[0.5, 0.5]),
            vec![row(&[0.5, 0.5]), row(&[0.5, 0.5])],
        )
        .unwrap();
        assert_eq!(kirk_multistep_step(&halving(), &cfg, &one(), 0).unwrap(), Vector::scalar(0.671875));
    }

    #[test]
    fn kirk_sp_by_hand() {
        let half = row(&[0.5, 0.5]);
        let cfg = SchemeConfig::new(Family::KirkSp, vec![1, 1, 1], half.clone(), vec![half.clone(), half]).unwrap();
        assert_eq!(kirk_sp_step(&halving(), &cfg, &one(), 0).unwrap(), Vector::scalar(0.421875));

        let id = row(&[1.0]);
        let cfg = SchemeConfig::new(Family::KirkSp, vec![0, 0, 0], id.clone(), vec![id.clone(), id]).unwrap();
        assert_eq!(kirk_sp_step(&halving(), &cfg, &Vector::scalar(3.7), 0).unwrap(), Vector::scalar(3.7));
    }

    #[test]
    fn noor_by_hand() {
        let full = row(&[0.0, 1.0]);
        let cfg = SchemeConfig::new(Family::MultistepRs, vec![1, 1, 1], full.clone(), vec![full.clone(), full])
            .unwrap();
        assert_eq!(multistep_rs_step(&halving(), &cfg, &one(), 0).unwrap(), Vector::scalar(0.125));
    }

    #[test]
    fn mann_from_rs_with_zero_beta() {
        let cfg = SchemeConfig::new(Family::MultistepRs, vec![1, 1], row(&[0.7, 0.3]), vec![row(&[1.0, 0.0])])
            .unwrap();
        // (1 − 0.3)·1 + 0.3·0.5
        assert_eq!(multistep_rs_step(&halving(), &cfg, &one(), 0).unwrap(), Vector::scalar(0.85));
    }

    #[test]
    fn sp_by_hand() {
        let half = row(&[0.5, 0.5]);
        let cfg = SchemeConfig::new(Family::MultistepAlt, vec![1, 1, 1], half.clone(), vec![half.clone(), half])
            .unwrap();
        assert_eq!(multistep_alt_step(&halving(), &cfg, &one(), 0).unwrap(), Vector::scalar(0.421875));
    }

    #[test]
    fn family_mismatch_is_an_error() {
        let half = row(&[0.5, 0.5]);
        let cfg = SchemeConfig::new(Family::MultistepAlt, vec![1, 1], half.clone(), vec![half]).unwrap();
        assert!(kirk_sp_step(&halving(), &cfg, &one(), 0).is_err());
        assert!(step(&halving(), &cfg, &one(), 0).is_ok());
    }

    #[test]
    fn fixed_point_is_kept_by_every_family() {
        let op = corpus::get("affine-2d-a03").unwrap();
        let q = op.fixed_point().unwrap().clone();
        let half = row(&[0.5, 0.5]);
        let cfgs = [
            SchemeConfig::new(Family::KirkMultistep, vec![3, 2, 1], row(&[0.1, 0.2, 0.3, 0.4]), vec![
                row(&[0.2, 0.5, 0.3]),
                row(&[0.6, 0.4]),
            ])
            .unwrap(),
            SchemeConfig::new(Family::KirkSp, vec![2, 1, 1], row(&[0.2, 0.3, 0.5]), vec![half.clone(), half.clone()])
                .unwrap(),
            SchemeConfig::new(Family::MultistepRs, vec![1, 1, 1], half.clone(), vec![half.clone(), half.clone()])
                .unwrap(),
            SchemeConfig::new(Family::MultistepAlt, vec![1, 1], half.clone(), vec![half]).unwrap(),
        ];
        for cfg in &cfgs {
            let out = step(&op, cfg, &q, 0).unwrap();
            assert!(op.dist(&out, &q) <= 1e-12, "{}: {out}", cfg.family());
        }
    }
}
