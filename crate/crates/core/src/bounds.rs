//! Certified Christoffel bounds and the degree at which they separate.
//!
//! Off the graph (but on its Zariski closure) a needle polynomial built from
//! a Chebyshev polynomial bounds `Λ_d` above by `2^{2 - 2 δ₃ ⌊d/2⌋}`; on the
//! graph a Gaussian-band argument bounds it below by
//! `2 vol(X) / (√(2π) erf(1) e (1 + d)^{2n})`. Once the lower bound beats
//! the upper bound the minimizer over `y` sits on the graph.

use std::f64::consts::{E, PI};

use serde::{Deserialize, Serialize};

use crate::basis::{eval_univariate, Family};
use crate::error::{Error, Result};

/// `erf(1)` as computed by the libm routine.
pub fn erf1() -> f64 {
    libm::erf(1.0)
}

/// `√(2π) · erf(1) · e`, the constant shared by both bounds.
fn band_constant() -> f64 {
    (2.0 * PI).sqrt() * erf1() * E
}

#[derive(Debug, Clone, PartialEq)]
pub struct NeedleSpec {
    center: Vec<f64>,
    delta: f64,
    degree: usize,
}

impl NeedleSpec {
    pub fn new(center: Vec<f64>, delta: f64, degree: usize) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::invalid("delta", format!("must lie in (0, 1), got {delta}")));
        }
        if degree == 0 {
            return Err(Error::invalid("degree", "must be at least 1"));
        }
        if center.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("center", "must be finite"));
        }
        Ok(NeedleSpec { center, delta, degree })
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// The decay guaranteed on `δ ≤ ‖z̃ - z‖ ≤ 1`, `2^{1 - δ d}`.
    pub fn decay_bound(&self) -> f64 {
        (1.0 - self.delta * self.degree as f64).exp2()
    }
}

/// `T_d(1 + δ² - ‖z - z̃‖²) / T_d(1 + δ²)`.
pub fn needle_eval(spec: &NeedleSpec, z_tilde: &[f64]) -> Result<f64> {
    if z_tilde.len() != spec.center.len() {
        return Err(Error::Dimension {
            expected: spec.center.len(),
            got: z_tilde.len(),
        });
    }
    let r2: f64 = spec
        .center
        .iter()
        .zip(z_tilde)
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    let top = 1.0 + spec.delta * spec.delta;
    let num = eval_univariate(Family::Chebyshev, spec.degree, top - r2);
    let den = eval_univariate(Family::Chebyshev, spec.degree, top);
    Ok(num / den)
}

/// `2^{2 - 2 δ₃ ⌊d/2⌋}`, the off-graph upper bound for a unit-mass measure.
pub fn upper_bound_off_graph(delta3: f64, d: usize) -> f64 {
    (2.0 - 2.0 * delta3 * (d / 2) as f64).exp2()
}

/// `2 vol(X) / (√(2π) erf(1) e (1 + d)^{2n})`.
pub fn lower_bound_on_graph(vol_x: f64, d: usize, n: usize) -> f64 {
    2.0 * vol_x / (band_constant() * ((1 + d) as f64).powi(2 * n as i32))
}

/// `δ₃ = δ₁ / (δ₁ + δ_max)`.
pub fn delta3(delta1: f64, delta_max: f64) -> Result<f64> {
    if !(delta1 > 0.0 && delta1.is_finite()) {
        return Err(Error::invalid("delta1", format!("must be positive, got {delta1}")));
    }
    if !(delta_max > 0.0 && delta_max.is_finite()) {
        return Err(Error::invalid("delta_max", format!("must be positive, got {delta_max}")));
    }
    Ok(delta1 / (delta1 + delta_max))
}

/// Point clouds up to this size get an exact pairwise diameter.
pub const EXACT_DIAMETER_LIMIT: usize = 2000;

/// `δ_max = 2 · diam`, with the diameter exact for small clouds and replaced
/// by the bounding-box diagonal (an upper bound) for large ones.
pub fn delta_max_estimate(points: &[Vec<f64>]) -> Result<f64> {
    let Some(first) = points.first() else {
        return Err(Error::invalid("points", "need at least one point"));
    };
    let dim = first.len();
    if points.iter().any(|p| p.len() != dim) {
        return Err(Error::invalid("points", "all points need the same dimension"));
    }
    let diam = if points.len() <= EXACT_DIAMETER_LIMIT {
        let mut best = 0.0f64;
        for (i, a) in points.iter().enumerate() {
            for b in &points[i + 1..] {
                let d2: f64 = a.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum();
                best = best.max(d2);
            }
        }
        best.sqrt()
    } else {
        (0..dim)
            .map(|j| {
                let (lo, hi) = points
                    .iter()
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p[j]), hi.max(p[j])));
                (hi - lo) * (hi - lo)
            })
            .sum::<f64>()
            .sqrt()
    };
    Ok(2.0 * diam)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeparationInputs {
    pub vol_x: f64,
    pub delta3: f64,
    pub n: usize,
    pub d_max: usize,
}

impl SeparationInputs {
    pub fn new(vol_x: f64, delta3: f64, n: usize, d_max: usize) -> Result<Self> {
        if !(vol_x > 0.0 && vol_x.is_finite()) {
            return Err(Error::invalid("vol_x", format!("must be positive, got {vol_x}")));
        }
        if !(delta3 > 0.0 && delta3 <= 1.0) {
            return Err(Error::invalid("delta3", format!("must lie in (0, 1], got {delta3}")));
        }
        if n == 0 {
            return Err(Error::invalid("n", "must be at least 1"));
        }
        if d_max == 0 {
            return Err(Error::invalid("d_max", "must be at least 1"));
        }
        Ok(SeparationInputs { vol_x, delta3, n, d_max })
    }

    /// Inputs from the tube radius `δ₁` and `δ_max` via [`delta3`].
    pub fn from_radii(vol_x: f64, delta1: f64, delta_max: f64, n: usize, d_max: usize) -> Result<Self> {
        SeparationInputs::new(vol_x, delta3(delta1, delta_max)?, n, d_max)
    }

    /// `C = vol(X) / (2 √(2π) erf(1) e)`.
    pub fn constant_c(&self) -> f64 {
        self.vol_x / (2.0 * band_constant())
    }

    /// `(1 + d)^{2n} / 2^{2 δ₃ ⌊d/2⌋}`.
    pub fn lhs(&self, d: usize) -> f64 {
        ((1 + d) as f64).powi(2 * self.n as i32) / (2.0 * self.delta3 * (d / 2) as f64).exp2()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateRow {
    pub d: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub separated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegreeCertificate {
    pub constant_c: f64,
    pub d_star_sep: Option<usize>,
    pub table: Vec<CertificateRow>,
}

impl DegreeCertificate {
    pub fn found(&self) -> bool {
        self.d_star_sep.is_some()
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Smallest `d` from which `(1+d)^{2n} / 2^{2δ₃⌊d/2⌋} < C` holds for every
/// degree up to `d_max`.
///
/// The floor makes the left side non-monotone between consecutive degrees,
/// so the first satisfying degree is not reported unless the whole tail
/// also satisfies the inequality.
pub fn separating_degree(inp: &SeparationInputs) -> DegreeCertificate {
    let c = inp.constant_c();
    let table: Vec<CertificateRow> = (1..=inp.d_max)
        .map(|d| {
            let lhs = inp.lhs(d);
            CertificateRow {
                d,
                lhs,
                rhs: c,
                separated: lhs < c,
            }
        })
        .collect();
    let tail_start = table.iter().rposition(|r| !r.separated).map_or(0, |i| i + 1);
    let d_star_sep = table.get(tail_start).map(|r| r.d);
    DegreeCertificate {
        constant_c: c,
        d_star_sep,
        table,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum SufficientDegree {
    Valid {
        value: f64,
        /// Whether the separation inequality actually holds at `⌈value⌉`.
        holds_at_ceiling: bool,
    },
    Invalid {
        quantity: String,
        value: f64,
    },
}

/// Closed-form degree quantities of the refined separation argument.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemarkQuantities {
    /// `⌈C^{1/(2n)} n / δ₃⌉ - 1`.
    pub d0: i64,
    /// `ε` solving `C^{1/(2n)} n / (1 + d0) - δ₃ = (ε - 1) δ₃`.
    pub epsilon_gap: f64,
    /// `n / ((ε - 1) δ₃) · log₂(1 / C^{1/(2n)})`, gated on the sign of
    /// `C^{1/(2n)} / (1 + d0) - δ₃ / n`.
    pub sufficient_d: SufficientDegree,
}

/// Evaluates the refined degree formulas as written. The values are
/// informational only: with `d0` chosen as above the gating denominator is
/// never positive, and [`separating_degree`] is the authoritative answer.
pub fn remark_degree_quantities(constant_c: f64, delta3: f64, n: usize) -> Result<RemarkQuantities> {
    if !(constant_c > 0.0 && constant_c.is_finite()) {
        return Err(Error::invalid("constant_c", "must be positive"));
    }
    if !(delta3 > 0.0 && delta3 <= 1.0) {
        return Err(Error::invalid("delta3", "must lie in (0, 1]"));
    }
    if n == 0 {
        return Err(Error::invalid("n", "must be at least 1"));
    }
    let nf = n as f64;
    let root = constant_c.powf(1.0 / (2.0 * nf));
    let d0 = (root * nf / delta3).ceil() as i64 - 1;
    let gap = root * nf / (1 + d0) as f64 - delta3;
    let epsilon_gap = 1.0 + gap / delta3;
    let denominator = root / (1 + d0) as f64 - delta3 / nf;
    let sufficient_d = if denominator <= 0.0 {
        SufficientDegree::Invalid {
            quantity: "C^(1/2n)/(1+d0) - delta3/n".into(),
            value: denominator,
        }
    } else {
        let value = nf / ((epsilon_gap - 1.0) * delta3) * (1.0 / root).log2();
        if value.is_finite() && value > 0.0 {
            let inp = SeparationInputs {
                vol_x: 1.0,
                delta3,
                n,
                d_max: 1,
            };
            let dc = value.ceil() as usize;
            SufficientDegree::Valid {
                value,
                holds_at_ceiling: inp.lhs(dc) < constant_c,
            }
        } else {
            SufficientDegree::Invalid {
                quantity: "sufficient_d".into(),
                value,
            }
        }
    };
    Ok(RemarkQuantities {
        d0,
        epsilon_gap,
        sufficient_d,
    })
}
