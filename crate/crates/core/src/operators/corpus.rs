//! Named operators used by the tests, the guide and the command line.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::phi::PhiFunction;
use crate::vector::{Norm, Vector};

use super::{Condition, ContractConstants, Operator};

/// Every corpus id, in listing order.
pub const IDS: [&str; 10] = [
    "halving-1d",
    "affine-1d",
    "affine-2d-a03",
    "scaled-3d",
    "rotation-2d",
    "cosine-1d",
    "trig-2d",
    "sup-3d",
    "jump-1d",
    "doubling-1d",
];

/// Looks up a corpus operator by id.
pub fn get(id: &str) -> Result<Operator> {
    let op = match id {
        "halving-1d" => banach(Operator::new(id, 1, |x| vec![x[0] / 2.0]), 0.5)
            .with_fixed_point(Vector::scalar(0.0)),
        "affine-1d" => banach(Operator::new(id, 1, |x| vec![(x[0] + 1.0) / 2.0]), 0.5)
            .with_fixed_point(Vector::scalar(1.0)),
        "affine-2d-a03" => {
            // ‖A‖₂ ≈ 0.3257 for A = [[0.3, 0.1], [0, 0.2]]
            let op = Operator::new(id, 2, |x| {
                vec![0.3 * x[0] + 0.1 * x[1] + 1.0, 0.2 * x[1] + 1.0]
            });
            let q2 = 1.0 / 0.8;
            let q1 = (1.0 + 0.1 * q2) / 0.7;
            banach(op, 0.33).with_fixed_point(Vector::from_raw(vec![q1, q2]))
        }
        "scaled-3d" => {
            let op = Operator::new(id, 3, |x| {
                vec![0.6 * x[0] + 1.0, 0.6 * x[1] - 2.0, 0.6 * x[2] + 0.5]
            });
            banach(op, 0.6).with_fixed_point(Vector::from_raw(vec![2.5, -5.0, 1.25]))
        }
        "rotation-2d" => {
            let (s, c) = (PI / 6.0).sin_cos();
            let (m00, m01, m10, m11) = (0.8 * c, -0.8 * s, 0.8 * s, 0.8 * c);
            let op = Operator::new(id, 2, move |x| {
                vec![m00 * x[0] + m01 * x[1] + 1.0, m10 * x[0] + m11 * x[1]]
            });
            // (I − M) q = (1, 0)
            let (p00, p01, p10, p11) = (1.0 - m00, -m01, -m10, 1.0 - m11);
            let det = p00 * p11 - p01 * p10;
            let q = Vector::from_raw(vec![p11 / det, -p10 / det]);
            banach(op, 0.8).with_fixed_point(q)
        }
        "cosine-1d" => {
            let op = banach(Operator::new(id, 1, |x| vec![0.5 * x[0].cos()]), 0.5);
            let q = picard_limit(&op, Vector::scalar(0.0))?;
            op.with_fixed_point(q)
        }
        "trig-2d" => {
            // Jacobian [[0, 0.5 cos y], [−0.5 sin x, 0]] has spectral norm ≤ 0.5
            let op = Operator::new(id, 2, |x| {
                vec![0.5 * x[1].sin() + 1.0, 0.5 * x[0].cos() - 0.5]
            });
            let op = banach(op, 0.5);
            let q = picard_limit(&op, Vector::zeros(2))?;
            op.with_fixed_point(q)
        }
        "sup-3d" => {
            // max absolute row sum is 0.7
            let op = Operator::new(id, 3, |x| {
                vec![
                    0.2 * x[0] - 0.3 * x[1] + 0.1 * x[2] + 1.0,
                    0.1 * x[0] + 0.4 * x[1] - 0.2 * x[2],
                    0.3 * x[1] + 0.3 * x[2] - 1.0,
                ]
            })
            .with_norm(Norm::Sup);
            let op = banach(op, 0.7);
            let q = picard_limit(&op, Vector::zeros(3))?;
            op.with_fixed_point(q)
        }
        "jump-1d" => {
            // Discontinuous at 1, so no Banach constant exists.
            let op = Operator::new(id, 1, |x| {
                vec![if x[0] < 1.0 { x[0] / 3.0 } else { 0.0 }]
            });
            let k = ContractConstants::new(1.0 / 3.0, 1.0, PhiFunction::Saturating(1.0))?;
            op.with_class(Condition::ImoruOlatinwo, k)
                .with_fixed_point(Vector::scalar(0.0))
        }
        "doubling-1d" => {
            Operator::new(id, 1, |x| vec![2.0 * x[0]]).with_fixed_point(Vector::scalar(0.0))
        }
        _ => {
            return Err(Error::UnknownTag {
                what: "operator",
                tag: id.to_string(),
            })
        }
    }?;
    Ok(op)
}

/// All corpus operators, in listing order.
pub fn all() -> Vec<Operator> {
    IDS.iter()
        .map(|id| get(id).expect("corpus entries are well formed"))
        .collect()
}

/// Corpus operators that declare contractive constants and a fixed point.
pub fn contractive() -> Vec<Operator> {
    all()
        .into_iter()
        .filter(|op| op.constants().is_some() && op.fixed_point().is_some())
        .collect()
}

fn banach(op: Operator, a: f64) -> Operator {
    op.with_class(
        Condition::Banach,
        ContractConstants::banach(a).expect("corpus constants are in range"),
    )
}

fn picard_limit(op: &Operator, mut x: Vector) -> Result<Vector> {
    for _ in 0..2000 {
        let next = op.apply(&x)?;
        if next == x {
            break;
        }
        x = next;
    }
    Ok(x)
}

/// One row of the machine-readable corpus listing.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusEntry {
    pub id: String,
    pub dim: usize,
    pub norm: Norm,
    pub class: Option<Condition>,
    pub a: Option<f64>,
    pub l: Option<f64>,
    pub phi: Option<PhiFunction>,
    pub fixed_point: Option<Vector>,
}

impl From<&Operator> for CorpusEntry {
    fn from(op: &Operator) -> Self {
        let k = op.constants();
        CorpusEntry {
            id: op.id().to_string(),
            dim: op.dim(),
            norm: op.norm(),
            class: op.class(),
            a: k.map(|k| k.a),
            l: k.map(|k| k.l),
            phi: k.map(|k| k.phi),
            fixed_point: op.fixed_point().cloned(),
        }
    }
}

pub fn table() -> Vec<CorpusEntry> {
    all().iter().map(CorpusEntry::from).collect()
}
