//! Measures on the joint `(x, y)` space and their moment matrices.
//!
//! The central object is the degenerate measure carried by the graph of a
//! function, `dμ(x, y) = dλ(x) δ_{f(x) = y}`. Its moment matrix is assembled by
//! tensor Gauss-Legendre quadrature in `x` with `y` pinned to `f(x)`. The
//! Gaussian-band smoothing `μ_ε` adds a per-slice quadrature in `y`, and the
//! data-driven variant averages outer products of sampled basis vectors.

mod io;
pub mod quadrature;

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::basis::{Basis, BasisSpec};
use crate::error::{Error, Result};
use crate::par::{self, CompensatedSum};

pub use io::MomentMatrixJson;
pub use quadrature::{gauss_legendre_rule, tensor_rule};

/// Relative symmetry tolerance of a [`MomentMatrix`].
pub const SYMMETRY_TOL: f64 = 1e-14;
/// Eigenvalues may dip to `-PSD_TOL * λ_max` and still count as PSD.
pub const PSD_TOL: f64 = 1e-10;
/// Allowed relative gap between the (0,0) moment and the measure mass.
pub const MASS_TOL: f64 = 1e-10;

/// Quadrature order used when none is given: `2 (d + 1)` per dimension.
pub fn default_quad_order(degree: usize) -> usize {
    2 * (degree + 1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Normalization {
    #[default]
    Lebesgue,
    Probability,
}

impl fmt::Display for Normalization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Normalization::Lebesgue => "lebesgue",
            Normalization::Probability => "probability",
        })
    }
}

/// Axis-aligned box `X = ∏ [lower_j, upper_j]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxDomain {
    lower: Vec<f64>,
    upper: Vec<f64>,
    normalization: Normalization,
}

impl BoxDomain {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>, normalization: Normalization) -> Result<Self> {
        if lower.is_empty() || lower.len() != upper.len() {
            return Err(Error::invalid(
                "domain",
                "lower and upper must be non-empty and of equal length",
            ));
        }
        if lower
            .iter()
            .zip(&upper)
            .any(|(a, b)| !(a.is_finite() && b.is_finite() && a < b))
        {
            return Err(Error::invalid("domain", "need finite lower[j] < upper[j]"));
        }
        Ok(BoxDomain {
            lower,
            upper,
            normalization,
        })
    }

    /// `[lo, hi]` with Lebesgue normalization.
    pub fn interval(lo: f64, hi: f64) -> Result<Self> {
        BoxDomain::new(vec![lo], vec![hi], Normalization::Lebesgue)
    }

    pub fn with_normalization(mut self, normalization: Normalization) -> Self {
        self.normalization = normalization;
        self
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    pub fn volume(&self) -> f64 {
        self.lower.iter().zip(&self.upper).map(|(a, b)| b - a).product()
    }

    /// Total mass of λ restricted to the box under the chosen normalization.
    pub fn mass(&self) -> f64 {
        match self.normalization {
            Normalization::Lebesgue => self.volume(),
            Normalization::Probability => 1.0,
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (a, b))| *a <= *v && *v <= *b)
    }

    /// Euclidean distance from an interior point to the boundary.
    pub fn dist_to_boundary(&self, x: &[f64]) -> f64 {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(v, (a, b))| (v - a).min(b - v))
            .fold(f64::INFINITY, f64::min)
    }

    /// Tensor Gauss-Legendre rule on the box with the normalization applied
    /// to the weights.
    pub fn quadrature(&self, order: usize) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
        let (nodes, mut w) = tensor_rule(&self.lower, &self.upper, order)?;
        if self.normalization == Normalization::Probability {
            let v = self.volume();
            w.iter_mut().for_each(|w| *w /= v);
        }
        Ok((nodes, w))
    }
}

pub type ScalarFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Pushforward of λ on a box onto the graph of `f`.
#[derive(Clone)]
pub struct GraphMeasure {
    pub f: ScalarFn,
    pub domain: BoxDomain,
    pub quad_order: usize,
}

impl fmt::Debug for GraphMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GraphMeasure")
            .field("domain", &self.domain)
            .field("quad_order", &self.quad_order)
            .finish_non_exhaustive()
    }
}

impl GraphMeasure {
    pub fn new<F>(f: F, domain: BoxDomain, quad_order: usize) -> Result<Self>
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        if quad_order == 0 {
            return Err(Error::invalid("quad_order", "must be at least 1"));
        }
        Ok(GraphMeasure {
            f: Arc::new(f),
            domain,
            quad_order,
        })
    }

    pub fn mass(&self) -> f64 {
        self.domain.mass()
    }

    /// Quadrature nodes lifted onto the graph, `(x_q, f(x_q))`, with weights.
    pub fn graph_nodes(&self) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
        let (xs, w) = self.domain.quadrature(self.quad_order)?;
        let lifted = xs
            .into_iter()
            .map(|mut x| {
                let y = (self.f)(&x);
                if !y.is_finite() {
                    return Err(Error::NonFinite { node: x });
                }
                x.push(y);
                Ok(x)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok((lifted, w))
    }
}

/// The ε-band smoothing of a graph measure with the truncated Gaussian
/// density `exp(-(f(x) - y)² / ε²) / (√(2π) ε erf(1))` on `|y - f(x)| ≤ ε`.
///
/// That density integrates to `1/√2` over each slice; `normalize_slice`
/// rescales every slice to unit mass instead.
#[derive(Debug, Clone)]
pub struct SmoothedMeasure {
    pub base: GraphMeasure,
    pub epsilon: f64,
    pub y_quad_order: usize,
    pub normalize_slice: bool,
}

impl SmoothedMeasure {
    pub fn new(base: GraphMeasure, epsilon: f64, y_quad_order: usize, normalize_slice: bool) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(Error::invalid("epsilon", format!("must be positive, got {epsilon}")));
        }
        if y_quad_order == 0 {
            return Err(Error::invalid("y_quad_order", "must be at least 1"));
        }
        Ok(SmoothedMeasure {
            base,
            epsilon,
            y_quad_order,
            normalize_slice,
        })
    }

    pub fn density(&self, offset: f64) -> f64 {
        let eps = self.epsilon;
        (-(offset * offset) / (eps * eps)).exp()
            / ((2.0 * std::f64::consts::PI).sqrt() * eps * libm::erf(1.0))
    }

    pub fn nodes(&self) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
        let (graph, wx) = self.base.graph_nodes()?;
        let (t, wt) = gauss_legendre_rule(self.y_quad_order)?;
        let eps = self.epsilon;
        let slice: Vec<f64> = t
            .iter()
            .zip(&wt)
            .map(|(t, w)| w * eps * self.density(eps * t))
            .collect();
        let slice_mass = slice.iter().fold(CompensatedSum::default(), |mut s, v| {
            s.add(*v);
            s
        });
        let scale = if self.normalize_slice {
            1.0 / slice_mass.value()
        } else {
            1.0
        };
        let n = graph[0].len();
        let mut nodes = Vec::with_capacity(graph.len() * t.len());
        let mut weights = Vec::with_capacity(graph.len() * t.len());
        for (z, w) in graph.iter().zip(&wx) {
            for (tk, sk) in t.iter().zip(&slice) {
                let mut p = z.clone();
                p[n - 1] += eps * tk;
                nodes.push(p);
                weights.push(w * sk * scale);
            }
        }
        Ok((nodes, weights))
    }
}

/// Points `(x_1, ..., x_n, y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    points: Vec<Vec<f64>>,
}

impl SampleSet {
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self> {
        let Some(first) = points.first() else {
            return Err(Error::invalid("samples", "need at least one sample"));
        };
        let dim = first.len();
        if dim < 2 {
            return Err(Error::invalid("samples", "points need at least one x and a y"));
        }
        for (i, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(Error::Dimension {
                    expected: dim,
                    got: p.len(),
                });
            }
            if p.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFiniteSample { index: i });
            }
        }
        Ok(SampleSet { points })
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Length of each point, `n + 1`.
    pub fn dim(&self) -> usize {
        self.points[0].len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Quadrature,
    MonteCarlo,
    Regularized,
}

/// Symmetric Gram matrix of a basis against a measure.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentMatrix {
    entries: DMatrix<f64>,
    spec: BasisSpec,
    provenance: Provenance,
    normalization: Normalization,
}

impl MomentMatrix {
    pub fn from_parts(
        entries: DMatrix<f64>,
        spec: BasisSpec,
        provenance: Provenance,
        normalization: Normalization,
    ) -> Result<Self> {
        let n = spec.size();
        if entries.nrows() != n || entries.ncols() != n {
            return Err(Error::Dimension {
                expected: n,
                got: entries.nrows(),
            });
        }
        Ok(MomentMatrix {
            entries,
            spec,
            provenance,
            normalization,
        })
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn spec(&self) -> &BasisSpec {
        &self.spec
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    pub fn size(&self) -> usize {
        self.entries.nrows()
    }

    /// Total mass, read off the (0,0) moment (`b_0 ≡ 1` in every family).
    pub fn mass(&self) -> f64 {
        self.entries[(0, 0)]
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = SymmetricEigen::new(self.entries.clone())
            .eigenvalues
            .iter()
            .copied()
            .collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// Checks symmetry (relative `1e-14`) and numerical PSD-ness.
    pub fn check_invariants(&self) -> Result<()> {
        let m = &self.entries;
        let scale = m.amax().max(f64::MIN_POSITIVE);
        for i in 0..m.nrows() {
            for j in 0..i {
                if (m[(i, j)] - m[(j, i)]).abs() > SYMMETRY_TOL * scale {
                    return Err(Error::invalid(
                        "moment matrix",
                        format!("not symmetric at ({i}, {j})"),
                    ));
                }
            }
        }
        let ev = self.eigenvalues();
        let lmax = ev.last().copied().unwrap_or(0.0).max(0.0);
        if ev[0] < -PSD_TOL * lmax {
            return Err(Error::invalid(
                "moment matrix",
                format!("eigenvalue {} below -{PSD_TOL}·λ_max", ev[0]),
            ));
        }
        Ok(())
    }

    /// Entrywise sum of matrices over the same basis, e.g. one per piece of
    /// a box partition.
    pub fn sum<'a, I>(parts: I) -> Result<MomentMatrix>
    where
        I: IntoIterator<Item = &'a MomentMatrix>,
    {
        let mut iter = parts.into_iter();
        let first = iter
            .next()
            .ok_or_else(|| Error::invalid("parts", "need at least one matrix"))?;
        let mut out = first.clone();
        for m in iter {
            if m.spec != out.spec {
                return Err(Error::invalid("parts", "basis specs differ"));
            }
            out.entries += &m.entries;
        }
        Ok(out)
    }

    /// Multiplies every moment by `factor`, e.g. to turn a probability
    /// estimate into Lebesgue units.
    pub fn scaled(mut self, factor: f64, normalization: Normalization) -> Self {
        self.entries *= factor;
        self.normalization = normalization;
        self
    }
}

/// `Σ_q w_q b(z_q) b(z_q)ᵀ`, each entry a compensated sum over nodes in
/// their given order. Rows are computed in parallel; every entry is summed
/// sequentially, so the result does not depend on the thread count.
pub(crate) fn assemble(basis: &Basis, nodes: &[Vec<f64>], weights: &[f64]) -> Result<DMatrix<f64>> {
    let n = basis.len();
    let vectors = par::try_map(nodes, |z| basis.eval(z))?;
    let rows = par::map_range(n, |i| {
        (i..n)
            .map(|j| {
                let mut s = CompensatedSum::default();
                for (b, w) in vectors.iter().zip(weights) {
                    s.add(w * b[i] * b[j]);
                }
                s.value()
            })
            .collect::<Vec<f64>>()
    });
    let mut m = DMatrix::zeros(n, n);
    for (i, row) in rows.into_iter().enumerate() {
        for (k, v) in row.into_iter().enumerate() {
            let j = i + k;
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    Ok(m)
}

fn check_nvars(spec: &BasisSpec, expected: usize) -> Result<()> {
    if spec.nvars != expected {
        return Err(Error::Dimension {
            expected,
            got: spec.nvars,
        });
    }
    Ok(())
}

fn check_mass(m: &DMatrix<f64>, mass: f64) -> Result<()> {
    let got = m[(0, 0)];
    if (got - mass).abs() > MASS_TOL * mass.abs().max(1.0) {
        return Err(Error::MassCheck {
            expected: mass,
            got,
        });
    }
    Ok(())
}

/// Moment matrix of the graph measure by tensor quadrature in `x`.
pub fn graph_moment_matrix(measure: &GraphMeasure, spec: &BasisSpec) -> Result<MomentMatrix> {
    check_nvars(spec, measure.domain.dim() + 1)?;
    let basis = Basis::new(spec.clone())?;
    let (nodes, w) = measure.graph_nodes()?;
    let m = assemble(&basis, &nodes, &w)?;
    check_mass(&m, measure.mass())?;
    MomentMatrix::from_parts(m, spec.clone(), Provenance::Quadrature, measure.domain.normalization())
}

/// Moment matrix of the ε-band smoothed graph measure.
pub fn smoothed_moment_matrix(measure: &SmoothedMeasure, spec: &BasisSpec) -> Result<MomentMatrix> {
    check_nvars(spec, measure.base.domain.dim() + 1)?;
    let basis = Basis::new(spec.clone())?;
    let (nodes, w) = measure.nodes()?;
    let m = assemble(&basis, &nodes, &w)?;
    // unnormalized slices carry 1/√2 only up to the y-quadrature error
    if measure.normalize_slice {
        check_mass(&m, measure.base.mass())?;
    }
    MomentMatrix::from_parts(
        m,
        spec.clone(),
        Provenance::Quadrature,
        measure.base.domain.normalization(),
    )
}

/// Moment matrix of the full-dimensional (nondegenerate) measure λ on a box;
/// `spec.nvars` must equal the box dimension.
pub fn box_moment_matrix(domain: &BoxDomain, spec: &BasisSpec, quad_order: usize) -> Result<MomentMatrix> {
    check_nvars(spec, domain.dim())?;
    let basis = Basis::new(spec.clone())?;
    let (nodes, w) = domain.quadrature(quad_order)?;
    let m = assemble(&basis, &nodes, &w)?;
    check_mass(&m, domain.mass())?;
    MomentMatrix::from_parts(m, spec.clone(), Provenance::Quadrature, domain.normalization())
}

/// Tikhonov regularization `M + β I`.
pub fn regularize(m: &MomentMatrix, beta: f64) -> Result<MomentMatrix> {
    if !(beta.is_finite() && beta > 0.0) {
        return Err(Error::invalid("beta", format!("must be positive and finite, got {beta}")));
    }
    let mut out = m.clone();
    for i in 0..out.size() {
        out.entries[(i, i)] += beta;
    }
    out.provenance = Provenance::Regularized;
    Ok(out)
}

/// Monte Carlo moment matrix `(1/m) Σ_i b(z_i) b(z_i)ᵀ`.
pub fn empirical_moment_matrix(samples: &SampleSet, spec: &BasisSpec) -> Result<MomentMatrix> {
    check_nvars(spec, samples.dim())?;
    let basis = Basis::new(spec.clone())?;
    let w = vec![1.0 / samples.len() as f64; samples.len()];
    let m = assemble(&basis, samples.points(), &w)?;
    MomentMatrix::from_parts(m, spec.clone(), Provenance::MonteCarlo, Normalization::Probability)
}

/// Replicates every sample `replication` times, adding independent
/// `N(0, sigma²)` noise to the `y` coordinate of each copy.
pub fn jitter_samples(samples: &SampleSet, sigma: f64, replication: usize, seed: u64) -> Result<SampleSet> {
    if !(sigma.is_finite() && sigma >= 0.0) {
        return Err(Error::invalid("sigma", format!("must be nonnegative, got {sigma}")));
    }
    if replication == 0 {
        return Err(Error::invalid("replication", "must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, sigma).map_err(|e| Error::invalid("sigma", e.to_string()))?;
    let last = samples.dim() - 1;
    let mut out = Vec::with_capacity(samples.len() * replication);
    for p in samples.points() {
        for _ in 0..replication {
            let mut q = p.clone();
            if sigma > 0.0 {
                q[last] += noise.sample(&mut rng);
            }
            out.push(q);
        }
    }
    SampleSet::new(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::Family;
    use approx::assert_relative_eq;

    fn line_measure(f: fn(f64) -> f64, order: usize) -> GraphMeasure {
        GraphMeasure::new(move |x| f(x[0]), BoxDomain::interval(-1.0, 1.0).unwrap(), order).unwrap()
    }

    fn mono(d: usize) -> BasisSpec {
        BasisSpec::new(2, d, Family::Monomial).unwrap()
    }

    #[test]
    fn identity_graph_matrix() {
        let m = graph_moment_matrix(&line_measure(|x| x, 4), &mono(1)).unwrap();
        let t = 2.0 / 3.0;
        let want = DMatrix::from_row_slice(3, 3, &[2.0, 0.0, 0.0, 0.0, t, t, 0.0, t, t]);
        assert!((m.entries() - want).amax() < 1e-14);
        m.check_invariants().unwrap();
    }

    #[test]
    fn zero_graph_matrix() {
        let m = graph_moment_matrix(&line_measure(|_| 0.0, 4), &mono(1)).unwrap();
        let want = DMatrix::from_row_slice(3, 3, &[2.0, 0.0, 0.0, 0.0, 2.0 / 3.0, 0.0, 0.0, 0.0, 0.0]);
        assert!((m.entries() - want).amax() < 1e-14);
        assert_eq!(m.entries(), &m.entries().transpose());
    }

    #[test]
    fn non_finite_node_is_reported() {
        let g = line_measure(|x| 1.0 / x, 3); // odd order puts a node at 0
        let err = graph_moment_matrix(&g, &mono(1)).unwrap_err();
        assert!(matches!(err, Error::NonFinite { ref node } if node == &vec![0.0]));
    }

    #[test]
    fn nvars_must_match_domain() {
        let g = line_measure(|x| x, 3);
        assert!(matches!(
            graph_moment_matrix(&g, &BasisSpec::new(3, 1, Family::Monomial).unwrap()),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn smoothed_slice_mass() {
        let g = line_measure(|x| x, 6);
        let raw = SmoothedMeasure::new(g.clone(), 0.1, 24, false).unwrap();
        let m = smoothed_moment_matrix(&raw, &mono(2)).unwrap();
        assert!((m.mass() - 2.0 / 2f64.sqrt()).abs() < 1e-8, "{}", m.mass());
        let unit = SmoothedMeasure::new(g, 0.1, 24, true).unwrap();
        let m = smoothed_moment_matrix(&unit, &mono(2)).unwrap();
        assert!((m.mass() - 2.0).abs() < 1e-10);
    }

    #[test]
    fn smoothed_converges_to_graph() {
        let g = line_measure(|x| x, 6);
        let exact = graph_moment_matrix(&g, &mono(2)).unwrap();
        let dist: Vec<f64> = [0.2, 0.1, 0.05]
            .iter()
            .map(|&eps| {
                let s = SmoothedMeasure::new(g.clone(), eps, 16, true).unwrap();
                (smoothed_moment_matrix(&s, &mono(2)).unwrap().entries() - exact.entries()).amax()
            })
            .collect();
        assert!(dist[0] > dist[1] && dist[1] > dist[2], "{dist:?}");
    }

    #[test]
    fn regularize_shifts_spectrum() {
        let zero = MomentMatrix::from_parts(
            DMatrix::zeros(3, 3),
            mono(1),
            Provenance::Quadrature,
            Normalization::Lebesgue,
        )
        .unwrap();
        let r = regularize(&zero, 1.0).unwrap();
        assert_eq!(r.entries(), &DMatrix::identity(3, 3));
        assert_eq!(r.provenance(), Provenance::Regularized);

        let m = graph_moment_matrix(&line_measure(|x| x * x, 8), &mono(3)).unwrap();
        let beta = 0.3;
        let r = regularize(&m, beta).unwrap();
        for i in 0..m.size() {
            assert_eq!(r.entries()[(i, i)], m.entries()[(i, i)] + beta);
        }
        for (a, b) in m.eigenvalues().iter().zip(r.eigenvalues()) {
            assert!((a + beta - b).abs() < 1e-10);
        }
        let ev = r.eigenvalues();
        assert!(ev[0] >= beta - 1e-12);
        let lmax = m.eigenvalues().last().copied().unwrap();
        assert!(ev.last().unwrap() / ev[0] <= (lmax + beta) / beta * (1.0 + 1e-12));
    }

    #[test]
    fn regularize_rejects_bad_beta() {
        let m = graph_moment_matrix(&line_measure(|x| x, 4), &mono(1)).unwrap();
        assert!(regularize(&m, 0.0).is_err());
        assert!(regularize(&m, -1.0).is_err());
        assert!(regularize(&m, f64::NAN).is_err());
    }

    #[test]
    fn empirical_single_and_repeated() {
        let s = mono(2);
        let z = vec![0.3, -0.7];
        let b = crate::basis::eval_basis_vector(&s, &z).unwrap();
        let one = empirical_moment_matrix(&SampleSet::new(vec![z.clone()]).unwrap(), &s).unwrap();
        for i in 0..b.len() {
            for j in 0..b.len() {
                assert_relative_eq!(one.entries()[(i, j)], b[i] * b[j], max_relative = 1e-15);
            }
        }
        let many = empirical_moment_matrix(&SampleSet::new(vec![z; 7]).unwrap(), &s).unwrap();
        assert!((many.entries() - one.entries()).amax() < 1e-14);
        let ev = one.eigenvalues();
        assert!(ev[..ev.len() - 1].iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn sample_validation() {
        assert!(SampleSet::new(vec![]).is_err());
        assert!(matches!(
            SampleSet::new(vec![vec![0.0, f64::NAN]]),
            Err(Error::NonFiniteSample { index: 0 })
        ));
        assert!(SampleSet::new(vec![vec![0.0, 1.0], vec![1.0]]).is_err());
        let s = SampleSet::new(vec![vec![0.0, 1.0, 2.0]]).unwrap();
        assert!(empirical_moment_matrix(&s, &mono(1)).is_err());
    }

    #[test]
    fn jitter_counts_and_copies() {
        let s = SampleSet::new(vec![vec![0.1, 0.2], vec![0.3, 0.4]]).unwrap();
        let j = jitter_samples(&s, 0.0, 3, 1).unwrap();
        assert_eq!(j.len(), 6);
        assert_eq!(j.points()[..3], vec![vec![0.1, 0.2]; 3][..]);
        assert_eq!(j.points()[3..], vec![vec![0.3, 0.4]; 3][..]);
        assert_eq!(jitter_samples(&s, 0.5, 4, 9).unwrap().len(), 8);
        assert!(jitter_samples(&s, -0.1, 1, 0).is_err());
        assert!(jitter_samples(&s, 0.1, 0, 0).is_err());
    }

    #[test]
    fn jitter_noise_is_centered() {
        let s = SampleSet::new(vec![vec![0.0, 1.5]]).unwrap();
        let j = jitter_samples(&s, 0.1, 1000, 42).unwrap();
        let mean = j.points().iter().map(|p| p[1] - 1.5).sum::<f64>() / 1000.0;
        assert!(mean.abs() <= 3.0 * 0.1 / 1000f64.sqrt(), "{mean}");
        assert_eq!(j, jitter_samples(&s, 0.1, 1000, 42).unwrap());
    }

    #[test]
    fn additivity_over_half_boxes() {
        let f = |x: &[f64]| (2.0 * x[0]).sin();
        let spec = mono(4);
        let whole = graph_moment_matrix(
            &GraphMeasure::new(f, BoxDomain::interval(-1.0, 1.0).unwrap(), 40).unwrap(),
            &spec,
        )
        .unwrap();
        let left = graph_moment_matrix(
            &GraphMeasure::new(f, BoxDomain::interval(-1.0, 0.0).unwrap(), 40).unwrap(),
            &spec,
        )
        .unwrap();
        let right = graph_moment_matrix(
            &GraphMeasure::new(f, BoxDomain::interval(0.0, 1.0).unwrap(), 40).unwrap(),
            &spec,
        )
        .unwrap();
        let sum = MomentMatrix::sum([&left, &right]).unwrap();
        assert!((sum.entries() - whole.entries()).amax() < 1e-10);
    }

    #[test]
    fn normalized_legendre_box_measure_is_identity() {
        for dim in 1..=2 {
            let dom = BoxDomain::new(vec![-1.0; dim], vec![1.0; dim], Normalization::Probability).unwrap();
            let spec = BasisSpec::new(dim, 6, Family::Legendre).unwrap();
            let m = box_moment_matrix(&dom, &spec, 8).unwrap();
            let basis = Basis::new(spec).unwrap();
            // ∫ P_k² dλ/2 = 1/(2k+1)
            let c: Vec<f64> = basis
                .indices()
                .iter()
                .map(|mi| mi.exponents.iter().map(|&k| (2.0 * k as f64 + 1.0).sqrt()).product())
                .collect();
            let n = basis.len();
            let scaled = DMatrix::from_fn(n, n, |i, j| c[i] * c[j] * m.entries()[(i, j)]);
            assert!((scaled - DMatrix::identity(n, n)).amax() < 1e-10);
        }
    }

    #[test]
    fn assembly_is_deterministic() {
        let g = line_measure(|x| x.exp(), 30);
        let spec = BasisSpec::new(2, 6, Family::Legendre).unwrap();
        let a = graph_moment_matrix(&g, &spec).unwrap();
        let b = graph_moment_matrix(&g, &spec).unwrap();
        assert_eq!(a.entries().as_slice(), b.entries().as_slice());
    }
}
