//! Self-maps of `R^d`, their declared contractive constants, and sampling
//! checkers for the contractive conditions the convergence and stability
//! results are stated against.
//!
//! All conditions share the constants stored on the operator:
//!
//! | condition        | inequality                                                        |
//! |------------------|-------------------------------------------------------------------|
//! | `banach`         | `‖Tx−Ty‖ ≤ a‖x−y‖`                                                |
//! | `ciric`          | `‖Tx−Ty‖ ≤ a·max{‖x−y‖, ‖x−Ty‖, ‖y−Tx‖}`                          |
//! | `ciric-avg`      | `‖Tx−Ty‖ ≤ a·max{‖x−y‖, (‖x−Tx‖+‖y−Ty‖)/2, ‖x−Ty‖, ‖y−Tx‖}`       |
//! | `osilike`        | `‖Tx−Ty‖ ≤ L‖x−Tx‖ + a‖x−y‖`                                      |
//! | `imoru-olatinwo` | `‖Tx−Ty‖ ≤ φ(‖x−Tx‖) + a‖x−y‖`                                    |
//!
//! The last two are not symmetric in `(x, y)`, so every sampled pair is
//! checked in both orders.

pub mod corpus;

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phi::PhiFunction;
use crate::vector::{Norm, Vector};

/// Largest power accepted by [`lemma2_bound`].
pub const MAX_BOUND_POWER: usize = 60;

/// Default relative guard applied to the right-hand side of every inequality.
pub const RELATIVE_GUARD: f64 = 1e-12;

/// Default absolute tolerance of the checkers.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Default half-width of the sampling box `[-R, R]^d`.
pub const DEFAULT_RADIUS: f64 = 10.0;

type MapFn = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;

/// The contractive conditions a map can be checked against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Condition {
    Banach,
    Ciric,
    CiricAvg,
    Osilike,
    ImoruOlatinwo,
}

impl Condition {
    pub const ALL: [Condition; 5] = [
        Condition::Banach,
        Condition::Ciric,
        Condition::CiricAvg,
        Condition::Osilike,
        Condition::ImoruOlatinwo,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Condition::Banach => "banach",
            Condition::Ciric => "ciric",
            Condition::CiricAvg => "ciric-avg",
            Condition::Osilike => "osilike",
            Condition::ImoruOlatinwo => "imoru-olatinwo",
        }
    }

    fn is_symmetric(self) -> bool {
        !matches!(self, Condition::Osilike | Condition::ImoruOlatinwo)
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl std::str::FromStr for Condition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Condition::ALL
            .into_iter()
            .find(|c| c.tag() == s)
            .ok_or_else(|| Error::UnknownTag {
                what: "condition",
                tag: s.to_string(),
            })
    }
}

/// Constants `(a, L, φ)` shared by all contractive conditions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContractConstants {
    pub a: f64,
    pub l: f64,
    pub phi: PhiFunction,
}

impl ContractConstants {
    pub fn new(a: f64, l: f64, phi: PhiFunction) -> Result<Self> {
        if !(0.0..1.0).contains(&a) {
            return Err(Error::invariant(
                "Operator contraction constant",
                format!("a must lie in [0, 1), got {a}"),
            ));
        }
        if !(l.is_finite() && l >= 0.0) {
            return Err(Error::invariant(
                "Operator Lipschitz-type constant",
                format!("L must be finite and non-negative, got {l}"),
            ));
        }
        Ok(ContractConstants { a, l, phi })
    }

    /// Banach constants `(a, 0, zero)`.
    pub fn banach(a: f64) -> Result<Self> {
        Self::new(a, 0.0, PhiFunction::Zero)
    }
}

/// A self-map of `R^d` together with what is known about it.
#[derive(Clone)]
pub struct Operator {
    id: String,
    dim: usize,
    map: Arc<MapFn>,
    norm: Norm,
    class: Option<Condition>,
    constants: Option<ContractConstants>,
    fixed_point: Option<Vector>,
}

impl fmt::Debug for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Operator")
            .field("id", &self.id)
            .field("dim", &self.dim)
            .field("norm", &self.norm)
            .field("class", &self.class)
            .field("constants", &self.constants)
            .field("fixed_point", &self.fixed_point)
            .finish()
    }
}

impl Operator {
    pub fn new<F>(id: impl Into<String>, dim: usize, map: F) -> Self
    where
        F: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        assert!(dim >= 1, "operator dimension must be positive");
        Operator {
            id: id.into(),
            dim,
            map: Arc::new(map),
            norm: Norm::default(),
            class: None,
            constants: None,
            fixed_point: None,
        }
    }

    pub fn with_norm(mut self, norm: Norm) -> Self {
        self.norm = norm;
        self
    }

    /// Declares the strongest condition the map satisfies and its constants.
    pub fn with_class(mut self, class: Condition, constants: ContractConstants) -> Self {
        self.class = Some(class);
        self.constants = Some(constants);
        self
    }

    /// Declares the fixed point `q`; rejected unless `‖Tq − q‖ ≤ 1e-12·(1 + ‖q‖)`.
    pub fn with_fixed_point(mut self, q: Vector) -> Result<Self> {
        q.check_dim(self.dim)?;
        let residual = self.norm.dist(&self.apply(&q)?, &q);
        let allowed = 1e-12 * (1.0 + self.norm.of(&q));
        if residual > allowed {
            return Err(Error::invariant(
                "Operator fixed point",
                format!("‖Tq − q‖ = {residual:e} exceeds {allowed:e}"),
            ));
        }
        self.fixed_point = Some(q);
        Ok(self)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn norm(&self) -> Norm {
        self.norm
    }

    pub fn class(&self) -> Option<Condition> {
        self.class
    }

    pub fn constants(&self) -> Option<&ContractConstants> {
        self.constants.as_ref()
    }

    pub fn fixed_point(&self) -> Option<&Vector> {
        self.fixed_point.as_ref()
    }

    pub(crate) fn require_constants(&self) -> Result<&ContractConstants> {
        self.constants
            .as_ref()
            .ok_or_else(|| Error::MissingConstants(self.id.clone()))
    }

    pub(crate) fn require_fixed_point(&self) -> Result<&Vector> {
        self.fixed_point
            .as_ref()
            .ok_or_else(|| Error::MissingFixedPoint(self.id.clone()))
    }

    /// Distance in the operator's norm.
    pub fn dist(&self, a: &Vector, b: &Vector) -> f64 {
        self.norm.dist(a, b)
    }

    /// One application `Tx`.
    pub fn apply(&self, x: &Vector) -> Result<Vector> {
        x.check_dim(self.dim)?;
        let out = (self.map)(x.as_slice());
        if out.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: out.len(),
            });
        }
        let out = Vector::from_raw(out);
        if !out.is_finite() {
            return Err(Error::NonFinite { step: 1 });
        }
        Ok(out)
    }

    /// `T^i x`, applying `T` to the running value `i` times in order.
    pub fn apply_power(&self, i: usize, x: &Vector) -> Result<Vector> {
        x.check_dim(self.dim)?;
        let mut cur = x.clone();
        for step in 1..=i {
            cur = self.apply(&cur).map_err(|e| match e {
                Error::NonFinite { .. } => Error::NonFinite { step },
                other => other,
            })?;
        }
        Ok(cur)
    }

    /// The powers `T^0 x, T^1 x, …, T^s x`.
    pub(crate) fn power_chain(&self, s: usize, x: &Vector) -> Result<Vec<Vector>> {
        x.check_dim(self.dim)?;
        let mut out = Vec::with_capacity(s + 1);
        out.push(x.clone());
        for step in 1..=s {
            let next = self.apply(&out[step - 1]).map_err(|e| match e {
                Error::NonFinite { .. } => Error::NonFinite { step },
                other => other,
            })?;
            out.push(next);
        }
        Ok(out)
    }
}

/// Free-function form of [`Operator::apply_power`].
pub fn apply_power(op: &Operator, i: usize, x: &Vector) -> Result<Vector> {
    op.apply_power(i, x)
}

/// Uniform pairs from `[-R, R]^d`, reproducible from a seed.
#[derive(Debug, Clone)]
pub struct UniformPairs {
    dim: usize,
    radius: f64,
    rng: ChaCha8Rng,
}

impl UniformPairs {
    pub fn new(dim: usize, radius: f64, seed: u64) -> Self {
        UniformPairs {
            dim,
            radius,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Default sampler for an operator: radius 10.
    pub fn for_operator(op: &Operator, seed: u64) -> Self {
        Self::new(op.dim(), DEFAULT_RADIUS, seed)
    }

    fn point(&mut self) -> Vector {
        let r = self.radius;
        Vector::from_raw((0..self.dim).map(|_| self.rng.gen_range(-r..=r)).collect())
    }
}

impl Iterator for UniformPairs {
    type Item = (Vector, Vector);

    fn next(&mut self) -> Option<Self::Item> {
        Some((self.point(), self.point()))
    }
}

/// What a [`ConditionReport`] checked.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Check {
    Condition(Condition),
    /// `‖T^i x − T^i y‖` against [`lemma2_bound`] for `i ≤ max_power`.
    IteratedPower { max_power: usize },
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Check::Condition(c) => write!(f, "{c}"),
            Check::IteratedPower { max_power } => write!(f, "iterated-power(i<={max_power})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub x: Vector,
    pub y: Vector,
    /// Power `i` for iterated-power checks.
    pub power: Option<usize>,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionReport {
    pub check: Check,
    pub samples_tested: usize,
    pub violations: Vec<Violation>,
    pub satisfied: bool,
}

impl ConditionReport {
    fn new(check: Check) -> Self {
        ConditionReport {
            check,
            samples_tested: 0,
            violations: Vec::new(),
            satisfied: true,
        }
    }

    fn record(&mut self, x: &Vector, y: &Vector, power: Option<usize>, lhs: f64, rhs: f64, tol: f64) {
        if exceeds(lhs, rhs, tol) {
            self.violations.push(Violation {
                x: x.clone(),
                y: y.clone(),
                power,
                lhs,
                rhs,
            });
        }
    }

    fn finish(mut self) -> Self {
        self.satisfied = self.violations.is_empty();
        self
    }
}

/// `lhs > rhs·(1 + 1e-12) + tol`
pub fn exceeds(lhs: f64, rhs: f64, tol: f64) -> bool {
    lhs > rhs * (1.0 + RELATIVE_GUARD) + tol
}

/// Evaluates `condition` with the operator's declared constants on
/// `n_samples` pairs drawn from `pairs`.
pub fn check_condition<I>(
    op: &Operator,
    condition: Condition,
    pairs: I,
    n_samples: usize,
    tol: f64,
) -> Result<ConditionReport>
where
    I: IntoIterator<Item = (Vector, Vector)>,
{
    if n_samples == 0 {
        return Err(Error::invariant("check_condition samples", "n_samples must be at least 1"));
    }
    let k = *op.require_constants()?;
    let d = |a: &Vector, b: &Vector| op.dist(a, b);
    let mut report = ConditionReport::new(Check::Condition(condition));

    for (x, y) in pairs.into_iter().take(n_samples) {
        let tx = op.apply(&x)?;
        let ty = op.apply(&y)?;
        let lhs = d(&tx, &ty);
        let orders: &[(&Vector, &Vector, &Vector, &Vector)] = if condition.is_symmetric() {
            &[(&x, &y, &tx, &ty)]
        } else {
            &[(&x, &y, &tx, &ty), (&y, &x, &ty, &tx)]
        };
        for &(p, r, tp, tr) in orders {
            let rhs = match condition {
                Condition::Banach => k.a * d(p, r),
                Condition::Ciric => k.a * d(p, r).max(d(p, tr)).max(d(r, tp)),
                Condition::CiricAvg => {
                    let avg = 0.5 * (d(p, tp) + d(r, tr));
                    k.a * d(p, r).max(avg).max(d(p, tr)).max(d(r, tp))
                }
                Condition::Osilike => k.l * d(p, tp) + k.a * d(p, r),
                Condition::ImoruOlatinwo => k.phi.eval(d(p, tp)) + k.a * d(p, r),
            };
            report.record(p, r, None, lhs, rhs, tol);
        }
        report.samples_tested += 1;
    }
    Ok(report.finish())
}

fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for j in 0..k {
        c = c * (n - j) as u128 / (j + 1) as u128;
    }
    c as f64
}

/// Right side of the iterated-power bound
/// `Σ_{j=1..i} C(i,j)·a^{i−j}·φ^j(‖x−Tx‖) + a^i·‖x−y‖`, where `φ^j` is the
/// `j`-fold composition of `φ`.
pub fn lemma2_bound(op: &Operator, x: &Vector, y: &Vector, i: usize) -> Result<f64> {
    if i > MAX_BOUND_POWER {
        return Err(Error::PowerCap {
            power: i,
            cap: MAX_BOUND_POWER,
        });
    }
    let k = op.require_constants()?;
    x.check_dim(op.dim())?;
    y.check_dim(op.dim())?;
    let u = op.dist(x, &op.apply(x)?);
    let mut sum = 0.0;
    let mut phi_j = u;
    for j in 1..=i {
        phi_j = k.phi.eval(phi_j);
        sum += binomial(i, j) * k.a.powi((i - j) as i32) * phi_j;
    }
    Ok(sum + k.a.powi(i as i32) * op.dist(x, y))
}

/// Checks `‖T^i x − T^i y‖ ≤ lemma2_bound(T, x, y, i) + tol` for every
/// sampled pair and every `i ≤ i_max`.
pub fn verify_lemma2<I>(
    op: &Operator,
    pairs: I,
    n_samples: usize,
    i_max: usize,
    tol: f64,
) -> Result<ConditionReport>
where
    I: IntoIterator<Item = (Vector, Vector)>,
{
    op.require_constants()?;
    if i_max > MAX_BOUND_POWER {
        return Err(Error::PowerCap {
            power: i_max,
            cap: MAX_BOUND_POWER,
        });
    }
    let mut report = ConditionReport::new(Check::IteratedPower { max_power: i_max });
    for (x, y) in pairs.into_iter().take(n_samples) {
        let xs = op.power_chain(i_max, &x)?;
        let ys = op.power_chain(i_max, &y)?;
        for i in 0..=i_max {
            let lhs = op.dist(&xs[i], &ys[i]);
            let rhs = lemma2_bound(op, &x, &y, i)?;
            report.record(&x, &y, Some(i), lhs, rhs, tol);
        }
        report.samples_tested += 1;
    }
    Ok(report.finish())
}

/// Returns the unique fixed point among `candidates`, `None` if no candidate
/// is fixed, and an error if two distinct candidates are both fixed.
/// A map satisfying the contractive-like condition never has two.
pub fn unique_fixed_point(op: &Operator, candidates: &[Vector], tol: f64) -> Result<Option<Vector>> {
    let mut found: Option<Vector> = None;
    for c in candidates {
        if op.dist(&op.apply(c)?, c) > tol {
            continue;
        }
        match &found {
            Some(q) if op.dist(q, c) > tol => {
                return Err(Error::invariant(
                    "fixed point uniqueness",
                    format!("both {q} and {c} are fixed points of `{}`", op.id()),
                ));
            }
            Some(_) => {}
            None => found = Some(c.clone()),
        }
    }
    Ok(found)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn halving(a: f64, phi: PhiFunction) -> Operator {
        Operator::new("halving", 1, |x| vec![x[0] / 2.0])
            .with_class(Condition::ImoruOlatinwo, ContractConstants::new(a, 0.0, phi).unwrap())
            .with_fixed_point(Vector::scalar(0.0))
            .unwrap()
    }

    #[test]
    fn power_zero_is_identity() {
        let op = halving(0.5, PhiFunction::Zero);
        assert_eq!(op.apply_power(0, &Vector::scalar(8.0)).unwrap(), Vector::scalar(8.0));
        assert_eq!(op.apply_power(3, &Vector::scalar(8.0)).unwrap(), Vector::scalar(1.0));
    }

    #[test]
    fn affine_power_by_hand() {
        // A(A·0 + b) + b with A = [[0.3, 0.1], [0, 0.2]], b = (1, 1)
        let op = Operator::new("affine", 2, |x| {
            vec![0.3 * x[0] + 0.1 * x[1] + 1.0, 0.2 * x[1] + 1.0]
        });
        let y = op.apply_power(2, &Vector::zeros(2)).unwrap();
        assert!((y[0] - 1.4).abs() < 1e-15);
        assert!((y[1] - 1.2).abs() < 1e-15);
    }

    #[test]
    fn power_reports_dimension_and_blowup() {
        let op = halving(0.5, PhiFunction::Zero);
        assert_eq!(
            op.apply_power(1, &Vector::zeros(2)).unwrap_err(),
            Error::DimensionMismatch { expected: 1, found: 2 }
        );
        let square = Operator::new("square", 1, |x| vec![x[0] * x[0]]);
        let err = square.apply_power(20, &Vector::scalar(10.0)).unwrap_err();
        // 10^(2^9) overflows at the 9th application
        assert_eq!(err, Error::NonFinite { step: 9 });
    }

    #[test]
    fn banach_checker_on_halving() {
        let op = halving(0.5, PhiFunction::Zero);
        let r = check_condition(&op, Condition::Banach, UniformPairs::for_operator(&op, 1), 1000, DEFAULT_TOL)
            .unwrap();
        assert!(r.satisfied);
        assert_eq!(r.samples_tested, 1000);

        let tight = halving(0.4, PhiFunction::Zero);
        let r = check_condition(&tight, Condition::Banach, UniformPairs::for_operator(&op, 1), 1000, DEFAULT_TOL)
            .unwrap();
        assert!(!r.satisfied);
        for v in &r.violations {
            assert!(v.lhs > v.rhs);
            assert!(op.dist(&v.x, &v.y) > 0.0);
        }
    }

    #[test]
    fn imoru_with_zero_phi_reduces_to_banach() {
        let op = halving(0.5, PhiFunction::Zero);
        let r = check_condition(
            &op,
            Condition::ImoruOlatinwo,
            UniformPairs::for_operator(&op, 2),
            10_000,
            DEFAULT_TOL,
        )
        .unwrap();
        assert!(r.satisfied);
    }

    #[test]
    fn unknown_condition_tag() {
        assert!(matches!(
            "kannan".parse::<Condition>(),
            Err(Error::UnknownTag { what: "condition", .. })
        ));
        assert_eq!("ciric-avg".parse::<Condition>().unwrap(), Condition::CiricAvg);
    }

    #[test]
    fn checker_needs_constants() {
        let op = Operator::new("free", 1, |x| vec![x[0]]);
        let err = check_condition(&op, Condition::Banach, UniformPairs::new(1, 1.0, 0), 1, 0.0).unwrap_err();
        assert!(matches!(err, Error::MissingConstants(_)));
    }

    #[test]
    fn lemma2_bound_small_cases() {
        let op = halving(0.5, PhiFunction::Zero);
        let x = Vector::scalar(4.0);
        let y = Vector::scalar(0.0);
        assert_eq!(lemma2_bound(&op, &x, &y, 0).unwrap(), 4.0);
        assert_eq!(lemma2_bound(&op, &x, &y, 2).unwrap(), 1.0);
        assert_eq!(op.dist(&op.apply_power(2, &x).unwrap(), &op.apply_power(2, &y).unwrap()), 1.0);

        // i = 1 is the right side of the contractive-like condition itself
        let sat = halving(0.5, PhiFunction::Saturating(0.7));
        let x = Vector::scalar(3.0);
        let y = Vector::scalar(-1.0);
        let direct = PhiFunction::Saturating(0.7).eval(1.5) + 0.5 * 4.0;
        assert!((lemma2_bound(&sat, &x, &y, 1).unwrap() - direct).abs() < 1e-15);
    }

    #[test]
    fn lemma2_power_cap() {
        let op = halving(0.5, PhiFunction::Zero);
        let x = Vector::scalar(1.0);
        assert!(lemma2_bound(&op, &x, &x, 60).is_ok());
        assert_eq!(
            lemma2_bound(&op, &x, &x, 61).unwrap_err(),
            Error::PowerCap { power: 61, cap: 60 }
        );
    }

    #[test]
    fn binomials_are_exact_where_representable() {
        assert_eq!(binomial(10, 3), 120.0);
        assert_eq!(binomial(60, 0), 1.0);
        assert_eq!(binomial(56, 28), 7_648_690_600_760_440.0);
    }

    #[test]
    fn lemma2_bound_at_fixed_point_is_geometric() {
        let op = halving(0.5, PhiFunction::Linear(3.0));
        let q = Vector::scalar(0.0);
        let y = Vector::scalar(5.0);
        let mut prev = f64::INFINITY;
        for i in 0..20 {
            let b = lemma2_bound(&op, &q, &y, i).unwrap();
            assert_eq!(b, 0.5f64.powi(i as i32) * 5.0);
            assert!(b < prev);
            prev = b;
        }
    }

    #[test]
    fn verify_lemma2_with_zero_max_power() {
        let op = Operator::new("shift", 1, |x| vec![0.9 * x[0] + 3.0])
            .with_class(Condition::Banach, ContractConstants::banach(0.9).unwrap());
        let r = verify_lemma2(&op, UniformPairs::for_operator(&op, 9), 50, 0, 0.0).unwrap();
        assert!(r.satisfied);
    }

    #[test]
    fn two_fixed_points_are_rejected() {
        // x³ fixes −1, 0 and 1; no contractive-like constants can hold.
        let cube = Operator::new("cube", 1, |x| vec![x[0] * x[0] * x[0]])
            .with_class(Condition::ImoruOlatinwo, ContractConstants::new(0.9, 0.0, PhiFunction::Linear(1.0)).unwrap());
        let cands = [Vector::scalar(-1.0), Vector::scalar(0.0), Vector::scalar(1.0)];
        assert!(unique_fixed_point(&cube, &cands, 1e-12).is_err());
        let r = check_condition(&cube, Condition::ImoruOlatinwo, UniformPairs::new(1, 1.0, 3), 10_000, DEFAULT_TOL)
            .unwrap();
        assert!(!r.satisfied);

        let op = halving(0.5, PhiFunction::Zero);
        let found = unique_fixed_point(&op, &[Vector::scalar(1.0), Vector::scalar(0.0)], 1e-12).unwrap();
        assert_eq!(found, Some(Vector::scalar(0.0)));
    }

    #[test]
    fn bad_fixed_point_is_rejected() {
        let op = Operator::new("halving", 1, |x| vec![x[0] / 2.0]);
        assert!(op.clone().with_fixed_point(Vector::scalar(1e-9)).is_err());
        assert!(op.with_fixed_point(Vector::scalar(0.0)).is_ok());
    }

    #[test]
    fn constants_validate_range() {
        assert!(ContractConstants::banach(1.0).is_err());
        assert!(ContractConstants::banach(-0.1).is_err());
        assert!(ContractConstants::new(0.5, -1.0, PhiFunction::Zero).is_err());
    }
}
