//! Test functions, possibly defined piecewise over a box partition.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{BoxDomain, Normalization};

pub const CATALOG_NAMES: [&str; 8] = [
    "poly-quadratic",
    "poly-cubic",
    "sign",
    "abs",
    "step3",
    "sqrt01",
    "exp",
    "runge",
];

/// Closed-form definition of one piece. The non-polynomial forms act on the
/// first coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Formula {
    /// `Σ c_α x^α` over exponent vectors `α`.
    Polynomial { terms: Vec<(Vec<u32>, f64)> },
    Exp,
    Sqrt,
    /// `1 / (1 + 25 x²)`.
    Runge,
}

impl Formula {
    pub fn constant(c: f64) -> Self {
        Formula::Polynomial {
            terms: vec![(vec![], c)],
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Formula::Polynomial { terms } => terms
                .iter()
                .map(|(alpha, c)| {
                    alpha
                        .iter()
                        .zip(x)
                        .fold(*c, |acc, (&k, &v)| acc * v.powi(k as i32))
                })
                .sum(),
            Formula::Exp => x[0].exp(),
            Formula::Sqrt => x[0].sqrt(),
            Formula::Runge => 1.0 / (1.0 + 25.0 * x[0] * x[0]),
        }
    }

    /// Total degree for polynomial pieces.
    pub fn degree(&self) -> Option<u32> {
        match self {
            Formula::Polynomial { terms } => Some(
                terms
                    .iter()
                    .filter(|(_, c)| *c != 0.0)
                    .map(|(alpha, _)| alpha.iter().sum::<u32>())
                    .max()
                    .unwrap_or(0),
            ),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Piece {
    pub domain: BoxDomain,
    pub formula: Formula,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionSpec {
    name: String,
    pieces: Vec<Piece>,
    critical_x: Vec<Vec<f64>>,
    domain: BoxDomain,
}

impl FunctionSpec {
    /// Checks that the pieces tile their bounding box without overlapping
    /// interiors.
    pub fn new(name: impl Into<String>, pieces: Vec<Piece>, critical_x: Vec<Vec<f64>>) -> Result<Self> {
        let first = pieces
            .first()
            .ok_or_else(|| Error::invalid("pieces", "need at least one piece"))?;
        let n = first.domain.dim();
        if pieces.iter().any(|p| p.domain.dim() != n) || critical_x.iter().any(|c| c.len() != n) {
            return Err(Error::invalid("pieces", "all pieces and critical points need the same dimension"));
        }
        for p in &pieces {
            if let Formula::Polynomial { terms } = &p.formula {
                if terms.iter().any(|(a, c)| !c.is_finite() || a.len() > n) {
                    return Err(Error::invalid("terms", "coefficients must be finite and exponents fit nvars"));
                }
            }
        }
        let mut lo = first.domain.lower().to_vec();
        let mut hi = first.domain.upper().to_vec();
        for p in &pieces[1..] {
            for j in 0..n {
                lo[j] = lo[j].min(p.domain.lower()[j]);
                hi[j] = hi[j].max(p.domain.upper()[j]);
            }
        }
        for (i, a) in pieces.iter().enumerate() {
            for b in &pieces[i + 1..] {
                let overlap = (0..n).all(|j| {
                    a.domain.lower()[j].max(b.domain.lower()[j]) < a.domain.upper()[j].min(b.domain.upper()[j])
                });
                if overlap {
                    return Err(Error::invalid("pieces", "piece interiors overlap"));
                }
            }
        }
        let domain = BoxDomain::new(lo, hi, Normalization::Lebesgue)?;
        let covered: f64 = pieces.iter().map(|p| p.domain.volume()).sum();
        if (covered - domain.volume()).abs() > 1e-12 * domain.volume() {
            return Err(Error::invalid("pieces", "pieces do not cover their bounding box"));
        }
        Ok(FunctionSpec {
            name: name.into(),
            pieces,
            critical_x,
            domain,
        })
    }

    /// A single polynomial on `domain` with no critical points.
    pub fn polynomial(name: impl Into<String>, domain: BoxDomain, terms: Vec<(Vec<u32>, f64)>) -> Result<Self> {
        FunctionSpec::new(
            name,
            vec![Piece {
                domain: domain.with_normalization(Normalization::Lebesgue),
                formula: Formula::Polynomial { terms },
            }],
            vec![],
        )
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn critical_x(&self) -> &[Vec<f64>] {
        &self.critical_x
    }

    /// Bounding box of the pieces, Lebesgue-normalized.
    pub fn domain(&self) -> &BoxDomain {
        &self.domain
    }

    pub fn nvars_x(&self) -> usize {
        self.domain.dim()
    }

    /// Value of the first piece whose closed box contains `x`.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        self.pieces
            .iter()
            .find(|p| p.domain.contains(x))
            .map(|p| p.formula.eval(x))
            .ok_or_else(|| Error::OutsideDomain { point: x.to_vec() })
    }

    /// Largest piece degree when every piece is polynomial.
    pub fn polynomial_degree(&self) -> Option<u32> {
        self.pieces
            .iter()
            .map(|p| p.formula.degree())
            .try_fold(0, |acc, d| d.map(|d| acc.max(d)))
    }
}

fn interval(lo: f64, hi: f64) -> BoxDomain {
    BoxDomain::interval(lo, hi).expect("static interval")
}

fn poly1(coeffs: &[f64]) -> Formula {
    Formula::Polynomial {
        terms: coeffs
            .iter()
            .enumerate()
            .map(|(k, &c)| (vec![k as u32], c))
            .collect(),
    }
}

fn piece(lo: f64, hi: f64, formula: Formula) -> Piece {
    Piece {
        domain: interval(lo, hi),
        formula,
    }
}

/// Built-in univariate test functions:
///
/// | name | definition | critical x |
/// |---|---|---|
/// | `poly-quadratic` | `x² - 0.5` on `[-1, 1]` | none |
/// | `poly-cubic` | `x³ - 0.5 x` on `[-1, 1]` | none |
/// | `sign` | `-1` on `[-1, 0]`, `1` on `[0, 1]` | 0 |
/// | `abs` | `-x` on `[-1, 0]`, `x` on `[0, 1]` | 0 |
/// | `step3` | `-1`, `0`, `1` on thirds of `[-1, 1]` | ±1/3 |
/// | `sqrt01` | `√x` on `[0, 1]` | 0 |
/// | `exp` | `eˣ` on `[-1, 1]` | none |
/// | `runge` | `1 / (1 + 25x²)` on `[-1, 1]` | none |
pub fn catalog(name: &str) -> Result<FunctionSpec> {
    let third = 1.0 / 3.0;
    let (pieces, critical) = match name {
        "poly-quadratic" => (vec![piece(-1.0, 1.0, poly1(&[-0.5, 0.0, 1.0]))], vec![]),
        "poly-cubic" => (vec![piece(-1.0, 1.0, poly1(&[0.0, -0.5, 0.0, 1.0]))], vec![]),
        "sign" => (
            vec![
                piece(-1.0, 0.0, Formula::constant(-1.0)),
                piece(0.0, 1.0, Formula::constant(1.0)),
            ],
            vec![0.0],
        ),
        "abs" => (
            vec![piece(-1.0, 0.0, poly1(&[0.0, -1.0])), piece(0.0, 1.0, poly1(&[0.0, 1.0]))],
            vec![0.0],
        ),
        "step3" => (
            vec![
                piece(-1.0, -third, Formula::constant(-1.0)),
                piece(-third, third, Formula::constant(0.0)),
                piece(third, 1.0, Formula::constant(1.0)),
            ],
            vec![-third, third],
        ),
        "sqrt01" => (vec![piece(0.0, 1.0, Formula::Sqrt)], vec![0.0]),
        "exp" => (vec![piece(-1.0, 1.0, Formula::Exp)], vec![]),
        "runge" => (vec![piece(-1.0, 1.0, Formula::Runge)], vec![]),
        other => return Err(Error::UnknownFunction(other.to_string())),
    };
    FunctionSpec::new(name, pieces, critical.into_iter().map(|c| vec![c]).collect())
}
