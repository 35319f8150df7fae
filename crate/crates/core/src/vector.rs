//! Points of `R^d` and the norms the checkers measure them with.

use std::fmt;
use std::ops::Index;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point of `R^d` with finite coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Vector(Vec<f64>);

impl Vector {
    /// Builds a vector, rejecting empty input and non-finite coordinates.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::invariant("Vector dimension", "dimension must be at least 1"));
        }
        if let Some(i) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::invariant(
                "Vector finiteness",
                format!("coordinate {i} is {}", coords[i]),
            ));
        }
        Ok(Vector(coords))
    }

    pub fn zeros(dim: usize) -> Self {
        Vector(vec![0.0; dim])
    }

    /// One-dimensional convenience constructor.
    pub fn scalar(x: f64) -> Self {
        Vector(vec![x])
    }

    /// Wraps coordinates without checking them. Callers check finiteness
    /// where it matters (after each operator application).
    pub(crate) fn from_raw(coords: Vec<f64>) -> Self {
        Vector(coords)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }

    pub(crate) fn check_dim(&self, expected: usize) -> Result<()> {
        if self.dim() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: self.dim(),
            });
        }
        Ok(())
    }

    pub fn sub(&self, other: &Vector) -> Vector {
        debug_assert_eq!(self.dim(), other.dim());
        Vector(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn add(&self, other: &Vector) -> Vector {
        debug_assert_eq!(self.dim(), other.dim());
        Vector(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn scale(&self, c: f64) -> Vector {
        Vector(self.0.iter().map(|a| c * a).collect())
    }

    /// `self += c * other`
    pub(crate) fn axpy(&mut self, c: f64, other: &Vector) {
        debug_assert_eq!(self.dim(), other.dim());
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a += c * b;
        }
    }
}

impl Index<usize> for Vector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl TryFrom<Vec<f64>> for Vector {
    type Error = Error;

    fn try_from(coords: Vec<f64>) -> Result<Self> {
        Vector::new(coords)
    }
}

impl From<Vector> for Vec<f64> {
    fn from(v: Vector) -> Self {
        v.0
    }
}

impl fmt::Display for Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str(")")
    }
}

/// Norm used to measure distances in `R^d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Norm {
    #[default]
    Euclidean,
    Sup,
    L1,
}

impl Norm {
    pub fn of(self, v: &Vector) -> f64 {
        let c = v.as_slice();
        match self {
            Norm::Euclidean => c.iter().map(|x| x * x).sum::<f64>().sqrt(),
            Norm::Sup => c.iter().fold(0.0, |m, x| m.max(x.abs())),
            Norm::L1 => c.iter().map(|x| x.abs()).sum(),
        }
    }

    pub fn dist(self, a: &Vector, b: &Vector) -> f64 {
        self.of(&a.sub(b))
    }
}

impl std::str::FromStr for Norm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euclidean" | "l2" => Ok(Norm::Euclidean),
            "sup" | "max" | "linf" => Ok(Norm::Sup),
            "l1" => Ok(Norm::L1),
            _ => Err(Error::UnknownTag {
                what: "norm",
                tag: s.to_string(),
            }),
        }
    }
}

impl fmt::Display for Norm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Norm::Euclidean => "euclidean",
            Norm::Sup => "sup",
            Norm::L1 => "l1",
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rejects_non_finite_and_empty() {
        assert!(Vector::new(vec![]).is_err());
        assert!(Vector::new(vec![1.0, f64::NAN]).is_err());
        assert!(Vector::new(vec![f64::INFINITY]).is_err());
        assert!(Vector::new(vec![0.0, -3.0]).is_ok());
    }

    #[test]
    fn norms_on_a_known_vector() {
        let v = Vector::new(vec![3.0, -4.0]).unwrap();
        assert_eq!(Norm::Euclidean.of(&v), 5.0);
        assert_eq!(Norm::Sup.of(&v), 4.0);
        assert_eq!(Norm::L1.of(&v), 7.0);
    }

    fn vec3() -> impl Strategy<Value = Vector> {
        prop::collection::vec(-1e3..1e3f64, 3).prop_map(Vector::from_raw)
    }

    fn any_norm() -> impl Strategy<Value = Norm> {
        prop_oneof![Just(Norm::Euclidean), Just(Norm::Sup), Just(Norm::L1)]
    }

    proptest! {
        #[test]
        fn norm_axioms(u in vec3(), v in vec3(), c in -50.0..50.0f64, n in any_norm()) {
            let nu = n.of(&u);
            prop_assert!(nu >= 0.0);
            prop_assert!(n.of(&u.add(&v)) <= nu + n.of(&v) + 1e-9);
            let scaled = n.of(&u.scale(c));
            prop_assert!((scaled - c.abs() * nu).abs() <= 1e-9 * (1.0 + scaled));
        }

        #[test]
        fn norm_vanishes_only_at_zero(u in vec3(), n in any_norm()) {
            prop_assert_eq!(n.of(&u) == 0.0, u.as_slice().iter().all(|c| *c == 0.0));
        }
    }
}
