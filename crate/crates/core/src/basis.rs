//! Total-degree multivariate polynomial bases over the joint variables `(x, y)`.
//!
//! A basis is a family of univariate polynomials (monomial, Chebyshev of the
//! first kind, or standard Legendre) combined as tensor products over all
//! multi-indices of total degree at most `d`, listed in graded-lexicographic
//! order. An optional per-variable affine map sends a box onto `[-1, 1]`
//! before the univariate polynomials are evaluated.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Monomial,
    Chebyshev,
    #[default]
    Legendre,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Monomial => "monomial",
            Family::Chebyshev => "chebyshev",
            Family::Legendre => "legendre",
        })
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "monomial" => Ok(Family::Monomial),
            "chebyshev" => Ok(Family::Chebyshev),
            "legendre" => Ok(Family::Legendre),
            other => Err(Error::invalid(
                "family",
                format!("expected monomial, chebyshev or legendre, got `{other}`"),
            )),
        }
    }
}

/// Exponent vector of one tensor-product basis element.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultiIndex {
    pub exponents: Vec<u32>,
    pub total_degree: u32,
}

impl MultiIndex {
    pub fn new(exponents: Vec<u32>) -> Self {
        let total_degree = exponents.iter().sum();
        MultiIndex {
            exponents,
            total_degree,
        }
    }
}

/// Affine change of variable `t = (v - center) / half_width`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisMap {
    pub center: f64,
    pub half_width: f64,
}

impl AxisMap {
    pub const IDENTITY: AxisMap = AxisMap {
        center: 0.0,
        half_width: 1.0,
    };

    /// Map sending `[lo, hi]` onto `[-1, 1]`.
    pub fn from_interval(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::invalid(
                "interval",
                format!("need finite lo < hi, got [{lo}, {hi}]"),
            ));
        }
        Ok(AxisMap {
            center: 0.5 * (lo + hi),
            half_width: 0.5 * (hi - lo),
        })
    }

    #[inline]
    pub fn apply(&self, v: f64) -> f64 {
        (v - self.center) / self.half_width
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisSpec {
    pub nvars: usize,
    pub degree: usize,
    pub family: Family,
    /// One map per variable; `None` means the identity on every axis.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scaling: Option<Vec<AxisMap>>,
}

impl BasisSpec {
    pub fn new(nvars: usize, degree: usize, family: Family) -> Result<Self> {
        if nvars == 0 {
            return Err(Error::invalid("nvars", "must be at least 1"));
        }
        basis_size(nvars, degree)?;
        Ok(BasisSpec {
            nvars,
            degree,
            family,
            scaling: None,
        })
    }

    pub fn with_scaling(mut self, scaling: Vec<AxisMap>) -> Result<Self> {
        if scaling.len() != self.nvars {
            return Err(Error::Dimension {
                expected: self.nvars,
                got: scaling.len(),
            });
        }
        if scaling
            .iter()
            .any(|m| !(m.center.is_finite() && m.half_width.is_finite() && m.half_width > 0.0))
        {
            return Err(Error::invalid("scaling", "half widths must be positive"));
        }
        self.scaling = Some(scaling);
        Ok(self)
    }

    pub fn size(&self) -> usize {
        // validated on construction
        basis_size(self.nvars, self.degree).expect("validated basis size")
    }

    #[inline]
    pub(crate) fn map_coord(&self, var: usize, v: f64) -> f64 {
        match &self.scaling {
            Some(s) => s[var].apply(v),
            None => v,
        }
    }
}

/// Number of monomials of total degree at most `degree` in `nvars` variables.
pub fn basis_size(nvars: usize, degree: usize) -> Result<usize> {
    let err = || Error::Sizing { nvars, degree };
    if nvars == 0 {
        return Err(err());
    }
    // binomial(nvars + degree, degree) built incrementally; every partial
    // product is itself a binomial coefficient, so the division is exact.
    let mut acc: u128 = 1;
    for i in 1..=degree as u128 {
        acc = acc
            .checked_mul(nvars as u128 + i)
            .ok_or_else(err)?
            / i;
    }
    usize::try_from(acc).map_err(|_| err())
}

/// All multi-indices of total degree `<= spec.degree`, graded-lex ordered.
///
/// Within a degree, larger exponents on earlier variables come first, so for
/// two variables and degree 2 the order is `1, x, y, x², xy, y²`.
pub fn enumerate_multiindices(spec: &BasisSpec) -> Result<Vec<MultiIndex>> {
    let n = basis_size(spec.nvars, spec.degree)?;
    let mut out = Vec::with_capacity(n);
    let mut buf = vec![0u32; spec.nvars];
    for total in 0..=spec.degree as u32 {
        fill_degree(&mut buf, 0, total, &mut out);
    }
    debug_assert_eq!(out.len(), n);
    Ok(out)
}

fn fill_degree(buf: &mut [u32], pos: usize, remaining: u32, out: &mut Vec<MultiIndex>) {
    if pos + 1 == buf.len() {
        buf[pos] = remaining;
        out.push(MultiIndex::new(buf.to_vec()));
        return;
    }
    for e in (0..=remaining).rev() {
        buf[pos] = e;
        fill_degree(buf, pos + 1, remaining - e, out);
    }
}

/// Value of the degree-`k` member of `family` at `t` (any real `t`).
pub fn eval_univariate(family: Family, k: usize, t: f64) -> f64 {
    let mut vals = vec![0.0; k + 1];
    eval_univariate_upto(family, t, &mut vals);
    vals[k]
}

/// Fills `out[k]` with the degree-`k` family member at `t` for every `k`.
pub fn eval_univariate_upto(family: Family, t: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    out[0] = 1.0;
    if out.len() == 1 {
        return;
    }
    out[1] = t;
    for k in 1..out.len() - 1 {
        out[k + 1] = match family {
            Family::Monomial => out[k] * t,
            Family::Chebyshev => 2.0 * t * out[k] - out[k - 1],
            Family::Legendre => {
                let kf = k as f64;
                ((2.0 * kf + 1.0) * t * out[k] - kf * out[k - 1]) / (kf + 1.0)
            }
        };
    }
}

/// A basis with its multi-indices materialized, for repeated evaluation.
#[derive(Debug, Clone)]
pub struct Basis {
    spec: BasisSpec,
    indices: Vec<MultiIndex>,
}

impl Basis {
    pub fn new(spec: BasisSpec) -> Result<Self> {
        let indices = enumerate_multiindices(&spec)?;
        Ok(Basis { spec, indices })
    }

    pub fn spec(&self) -> &BasisSpec {
        &self.spec
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Per-variable univariate tables, `table[v * (d+1) + k]`.
    pub(crate) fn univariate_table(&self, point: &[f64]) -> Vec<f64> {
        let stride = self.spec.degree + 1;
        let mut table = vec![0.0; self.spec.nvars * stride];
        for (v, &p) in point.iter().enumerate() {
            let t = self.spec.map_coord(v, p);
            eval_univariate_upto(self.spec.family, t, &mut table[v * stride..(v + 1) * stride]);
        }
        table
    }

    pub fn eval_into(&self, point: &[f64], out: &mut [f64]) -> Result<()> {
        if point.len() != self.spec.nvars {
            return Err(Error::Dimension {
                expected: self.spec.nvars,
                got: point.len(),
            });
        }
        if out.len() != self.indices.len() {
            return Err(Error::Dimension {
                expected: self.indices.len(),
                got: out.len(),
            });
        }
        let stride = self.spec.degree + 1;
        let table = self.univariate_table(point);
        for (o, mi) in out.iter_mut().zip(&self.indices) {
            *o = mi
                .exponents
                .iter()
                .enumerate()
                .map(|(v, &e)| table[v * stride + e as usize])
                .product();
        }
        Ok(())
    }

    pub fn eval(&self, point: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.indices.len()];
        self.eval_into(point, &mut out)?;
        Ok(out)
    }
}

/// Basis vector `[b_1(p), ..., b_N(p)]` in graded-lex order.
pub fn eval_basis_vector(spec: &BasisSpec, point: &[f64]) -> Result<Vec<f64>> {
    Basis::new(spec.clone())?.eval(point)
}
