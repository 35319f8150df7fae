//! Random valid configurations for property tests and sweeps.

use rand::Rng;

use crate::schemes::{Family, SchemeConfig, WeightSchedule};

/// Smallest anchor weight the generators produce.
pub const MIN_ANCHOR: f64 = 0.05;
/// Largest anchor weight the generators produce. An anchor of 1 makes
/// `σ = 1` whatever the operator.
pub const MAX_ANCHOR: f64 = 0.95;

/// A simplex row of `len` entries whose first entry lies in
/// `[MIN_ANCHOR, MAX_ANCHOR]` (or is 1 when `len == 1`).
pub fn random_row<R: Rng + ?Sized>(rng: &mut R, len: usize) -> Vec<f64> {
    assert!(len >= 1, "a weight row has at least one entry");
    if len == 1 {
        return vec![1.0];
    }
    let anchor = rng.gen_range(MIN_ANCHOR..=MAX_ANCHOR);
    let raw: Vec<f64> = (1..len).map(|_| rng.gen_range(0.01..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let mut row = vec![anchor];
    row.extend(raw.iter().map(|w| (1.0 - anchor) * w / total));
    // push rounding error into the anchor so the row sums to 1 in floating point
    let drift: f64 = row.iter().sum::<f64>() - 1.0;
    row[0] -= drift;
    row
}

fn schedule<R: Rng + ?Sized>(rng: &mut R, power: usize) -> WeightSchedule {
    WeightSchedule::constant(random_row(rng, power + 1)).expect("generated rows lie on the simplex")
}

/// Kirk-multistep with depth in `2..=5`, top power in `1..=4` and
/// non-increasing powers of at least 1.
pub fn random_kirk_multistep<R: Rng + ?Sized>(rng: &mut R) -> SchemeConfig {
    let k = rng.gen_range(2..=5);
    let mut powers = vec![rng.gen_range(1..=4usize)];
    for _ in 1..k {
        let prev = *powers.last().unwrap();
        powers.push(rng.gen_range(1..=prev));
    }
    build(rng, Family::KirkMultistep, powers)
}

/// Kirk-SP with non-increasing powers `s_1 ∈ 1..=4`, `s_2, s_3 ≥ 1`.
pub fn random_kirk_sp<R: Rng + ?Sized>(rng: &mut R) -> SchemeConfig {
    let s1 = rng.gen_range(1..=4usize);
    let s2 = rng.gen_range(1..=s1);
    let s3 = rng.gen_range(1..=s2);
    build(rng, Family::KirkSp, vec![s1, s2, s3])
}

/// Either Kirk family, chosen uniformly.
pub fn random_kirk<R: Rng + ?Sized>(rng: &mut R) -> SchemeConfig {
    if rng.gen_bool(0.5) {
        random_kirk_multistep(rng)
    } else {
        random_kirk_sp(rng)
    }
}

/// A classical scheme (`x`-anchored or below-anchored) of depth `2..=4`.
pub fn random_classical<R: Rng + ?Sized>(rng: &mut R) -> SchemeConfig {
    let family = if rng.gen_bool(0.5) { Family::MultistepRs } else { Family::MultistepAlt };
    let k = rng.gen_range(2..=4);
    build(rng, family, vec![1; k])
}

fn build<R: Rng + ?Sized>(rng: &mut R, family: Family, powers: Vec<usize>) -> SchemeConfig {
    let alpha = schedule(rng, powers[0]);
    let betas = powers[1..].iter().map(|&s| schedule(rng, s)).collect();
    SchemeConfig::new(family, powers, alpha, betas).expect("generated configurations are valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generated_configs_validate() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..500 {
            random_kirk(&mut rng).validate().unwrap();
            random_classical(&mut rng).validate().unwrap();
        }
    }

    #[test]
    fn rows_sum_to_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for len in 1..8 {
            let r = random_row(&mut rng, len);
            assert!((r.iter().sum::<f64>() - 1.0).abs() <= 1e-15);
            assert!(r.iter().all(|w| *w >= 0.0));
        }
    }
}
