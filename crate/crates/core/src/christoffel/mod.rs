//! Christoffel function of a (possibly degenerate) moment matrix.
//!
//! For a moment matrix `M` in a basis `b`, the Christoffel function is
//! `Λ(z) = 1 / (b(z)ᵀ M⁻¹ b(z))`. Graph measures give a singular `M`, so the
//! evaluator either regularizes (`M + β I`) or works with the pseudoinverse
//! and reports `Λ(z) = 0` when `b(z)` has a component in the kernel.

mod search;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::basis::{eval_univariate, Basis, Family};
use crate::error::{Error, Result};
use crate::measures::{regularize, BoxDomain, MomentMatrix};

pub use search::{approximant_on_grid, golden_section, minimize_over_y, ApproximantPoint, YSearchConfig};

/// Default relative eigenvalue cut-off of the pseudoinverse.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;
/// Default kernel-membership threshold on `‖P_ker b(z)‖ / ‖b(z)‖`.
///
/// On-graph points keep a residual kernel component of order
/// `√(rank_tol · λ_max / (Λ(z) ‖b(z)‖²))` from the truncated near-kernel
/// eigenvectors, about `1e-5` at the default rank tolerance; points off
/// the variety have fractions of order one.
pub const DEFAULT_KERNEL_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Use `(M + β I)⁻¹`.
    Regularized { beta: f64 },
    /// Use `M†`; eigenvalues below `rank_tol · λ_max` are exact zeros, and a
    /// point is in the kernel when its basis vector has a kernel component
    /// larger than `kernel_tol · ‖b(z)‖`.
    Pseudoinverse { rank_tol: f64, kernel_tol: f64 },
}

impl Mode {
    /// Pseudoinverse with the default kernel-membership threshold.
    pub fn pseudoinverse(rank_tol: f64) -> Self {
        Mode::Pseudoinverse {
            rank_tol,
            kernel_tol: DEFAULT_KERNEL_TOL,
        }
    }
}

/// Immutable factorization of a moment matrix answering `Λ` and `q` queries.
#[derive(Debug, Clone)]
pub struct ChristoffelEvaluator {
    basis: Basis,
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<f64>,
    mode: Mode,
    mass: f64,
    rank: usize,
    /// Columns `v_k / √λ_k` over the retained eigenpairs.
    whitened: DMatrix<f64>,
    /// Orthonormal kernel basis (pseudoinverse mode only).
    kernel: DMatrix<f64>,
    domain: Option<BoxDomain>,
}

/// Symmetric eigendecomposition with eigenvalues in ascending order.
fn sorted_eigen(m: DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::Eigen);
    }
    let eig = SymmetricEigen::try_new(m, f64::EPSILON, 0).ok_or(Error::Eigen)?;
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = DMatrix::from_fn(eig.eigenvectors.nrows(), order.len(), |i, j| {
        eig.eigenvectors[(i, order[j])]
    });
    Ok((values, vectors))
}

pub fn build_evaluator(m: &MomentMatrix, mode: Mode) -> Result<ChristoffelEvaluator> {
    let (work, mass) = match mode {
        Mode::Regularized { beta } => {
            let r = regularize(m, beta)?;
            let mass = r.mass();
            (r, mass)
        }
        Mode::Pseudoinverse { rank_tol, kernel_tol } => {
            for (name, v) in [("rank_tol", rank_tol), ("kernel_tol", kernel_tol)] {
                if !(v > 0.0 && v < 1.0) {
                    return Err(Error::invalid(name, format!("must lie in (0, 1), got {v}")));
                }
            }
            (m.clone(), m.mass())
        }
    };
    let (eigenvalues, eigenvectors) = sorted_eigen(work.entries().clone())?;
    let n = eigenvalues.len();
    let lmax = eigenvalues[n - 1];
    let first_kept = match mode {
        Mode::Regularized { .. } => 0,
        Mode::Pseudoinverse { rank_tol, .. } => eigenvalues
            .iter()
            .position(|&l| l >= rank_tol * lmax)
            .unwrap_or(n),
    };
    if first_kept == n || lmax <= 0.0 {
        return Err(Error::invalid("moment matrix", "numerical rank is zero"));
    }
    if let Mode::Regularized { beta } = mode {
        if eigenvalues[0] <= 0.0 {
            return Err(Error::invalid(
                "beta",
                format!("{beta:e} leaves M + βI indefinite (smallest eigenvalue {:e})", eigenvalues[0]),
            ));
        }
    }
    let rank = n - first_kept;
    let whitened = DMatrix::from_fn(n, rank, |i, k| {
        let kk = first_kept + k;
        eigenvectors[(i, kk)] / eigenvalues[kk].sqrt()
    });
    let kernel = eigenvectors.columns(0, first_kept).into_owned();
    Ok(ChristoffelEvaluator {
        basis: Basis::new(m.spec().clone())?,
        eigenvalues,
        eigenvectors,
        mode,
        mass,
        rank,
        whitened,
        kernel,
        domain: None,
    })
}

impl ChristoffelEvaluator {
    /// Restricts `x` queries of the y-search to `domain`.
    pub fn with_domain(mut self, domain: BoxDomain) -> Result<Self> {
        if domain.dim() + 1 != self.basis.spec().nvars {
            return Err(Error::Dimension {
                expected: self.basis.spec().nvars - 1,
                got: domain.dim(),
            });
        }
        self.domain = Some(domain);
        Ok(self)
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// Mass of the measure behind the factorized matrix (including the
    /// regularizing mass in regularized mode).
    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// Numerical rank (the full size in regularized mode).
    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigenvectors
    }

    /// Inverse eigenvalues of the retained spectrum, ascending eigen order.
    pub fn inverse_eigenvalues(&self) -> Vec<f64> {
        self.eigenvalues[self.eigenvalues.len() - self.rank..]
            .iter()
            .map(|l| 1.0 / l)
            .collect()
    }

    pub fn domain(&self) -> Option<&BoxDomain> {
        self.domain.as_ref()
    }

    fn basis_vector(&self, z: &[f64]) -> Result<DVector<f64>> {
        if z.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("z", "point must be finite"));
        }
        Ok(DVector::from_vec(self.basis.eval(z)?))
    }

    /// Relative size of the kernel component, `‖P_ker b(z)‖ / ‖b(z)‖`.
    pub fn kernel_fraction(&self, z: &[f64]) -> Result<f64> {
        let b = self.basis_vector(z)?;
        if self.kernel.ncols() == 0 {
            return Ok(0.0);
        }
        Ok((self.kernel.transpose() * &b).norm() / b.norm())
    }

    /// `b(z)ᵀ M⁻¹ b(z)` (or with `M†`), ignoring any kernel component.
    pub fn inverse_christoffel(&self, z: &[f64]) -> Result<f64> {
        let b = self.basis_vector(z)?;
        Ok((self.whitened.transpose() * b).norm_squared())
    }

    /// `Λ(z)`, clamped to `[0, mass]`.
    pub fn lambda_value(&self, z: &[f64]) -> Result<f64> {
        let b = self.basis_vector(z)?;
        if let Mode::Pseudoinverse { kernel_tol, .. } = self.mode {
            if self.kernel.ncols() > 0 && (self.kernel.transpose() * &b).norm() > kernel_tol * b.norm() {
                return Ok(0.0);
            }
        }
        let g = (self.whitened.transpose() * b).norm_squared();
        Ok((1.0 / g).min(self.mass))
    }

    /// Upper-triangular `R` with `b(x, y)ᵀ M⁻¹ b(x, y) = ‖R u(y)‖²`, where
    /// `u(y)` holds the univariate family values at the mapped `y`.
    pub(crate) fn y_slice(&self, x: &[f64]) -> Result<YSlice> {
        let spec = self.basis.spec();
        let n = spec.nvars - 1;
        if x.len() != n {
            return Err(Error::Dimension { expected: n, got: x.len() });
        }
        let d = spec.degree;
        let stride = d + 1;
        let mut pt = x.to_vec();
        pt.push(0.0);
        let table = self.basis.univariate_table(&pt);
        let r = self.whitened.ncols();
        let mut h = DMatrix::<f64>::zeros(r, stride);
        for (row, mi) in self.basis.indices().iter().enumerate() {
            let xpart: f64 = mi.exponents[..n]
                .iter()
                .enumerate()
                .map(|(v, &e)| table[v * stride + e as usize])
                .product();
            if xpart == 0.0 {
                continue;
            }
            let ky = mi.exponents[n] as usize;
            let mut col = h.column_mut(ky);
            col.axpy(xpart, &self.whitened.row(row).transpose(), 1.0);
        }
        let r_factor = if r >= stride { h.qr().r() } else { h };
        Ok(YSlice {
            r: r_factor,
            family: spec.family,
            map: spec.scaling.as_ref().map(|s| s[n]),
            u: vec![0.0; stride],
        })
    }
}

/// `g(y)` along a fixed `x`.
#[derive(Debug, Clone)]
pub(crate) struct YSlice {
    r: DMatrix<f64>,
    family: Family,
    map: Option<crate::basis::AxisMap>,
    u: Vec<f64>,
}

impl YSlice {
    pub(crate) fn eval(&mut self, y: f64) -> f64 {
        let t = self.map.map_or(y, |m| m.apply(y));
        crate::basis::eval_univariate_upto(self.family, t, &mut self.u);
        let mut acc = 0.0;
        for i in 0..self.r.nrows() {
            let mut s = 0.0;
            for j in 0..self.r.ncols() {
                s += self.r[(i, j)] * self.u[j];
            }
            acc += s * s;
        }
        acc
    }
}

/// `Σ_{i=0}^{d} (P_i(0)²)^n` and its cap `(1 + d)^{2n}`.
///
/// The sum is the unit-box expression that feeds the on-graph lower bound;
/// odd Legendre polynomials vanish at the origin.
pub fn unit_box_bound_sum(d: usize, n: usize) -> (f64, f64) {
    let sum = (0..=d)
        .map(|i| eval_univariate(Family::Legendre, i, 0.0).powi(2).powi(n as i32))
        .sum();
    let cap = ((1 + d) as f64).powi(2 * n as i32);
    (sum, cap)
}
