//! End-to-end experiments: measure, moments, evaluator, approximant on a
//! grid, and error metrics per degree.

mod catalog;
mod metrics;
mod report;

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::basis::{AxisMap, BasisSpec, Family};
use crate::christoffel::{approximant_on_grid, build_evaluator, ChristoffelEvaluator, Mode, YSearchConfig};
use crate::error::{Error, Result};
use crate::measures::{
    default_quad_order, empirical_moment_matrix, graph_moment_matrix, jitter_samples, smoothed_moment_matrix,
    GraphMeasure, MomentMatrix, Normalization, SampleSet, SmoothedMeasure,
};
use crate::par;

pub use catalog::{catalog, Formula, FunctionSpec, Piece, CATALOG_NAMES};
pub use metrics::{l1_error, rate_fit, rate_fit_points, sup_error, trapezoid_weights, PLATEAU_FLOOR};
pub use report::{
    fmt_f64, write_approximant_csv, ApproximantSample, ErrorReport, MaskInfo, ReportRow, REPORT_CSV_HEADER,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum ExperimentMode {
    /// Exact graph moments by per-piece quadrature.
    #[default]
    Tikhonov,
    /// Graph moments smeared over a Gaussian band of half-width `epsilon`.
    Smoothed { epsilon: f64 },
    /// Monte Carlo moments from `m` uniform `x` samples, each replicated
    /// with `N(0, sigma²)` noise on `y`.
    Empirical {
        m: usize,
        sigma: f64,
        replication: usize,
        seed: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub function: FunctionSpec,
    pub degrees: Vec<usize>,
    pub beta: f64,
    pub mode: ExperimentMode,
    /// Points per axis of the uniform evaluation grid.
    pub grid_points: usize,
    pub delta1: f64,
    pub family: Family,
    /// Gauss-Legendre points per axis; `2(d + 1)` when absent.
    pub quad_order: Option<usize>,
    /// Record wall-clock time per degree; otherwise `runtime_ms` is zero.
    pub timing: bool,
}

impl ExperimentSpec {
    /// Tikhonov mode, `β = 1e-8`, 1001 grid points, `δ₁ = 0`, Legendre basis.
    pub fn new(function: FunctionSpec, degrees: Vec<usize>) -> Self {
        ExperimentSpec {
            function,
            degrees,
            beta: 1e-8,
            mode: ExperimentMode::Tikhonov,
            grid_points: 1001,
            delta1: 0.0,
            family: Family::Legendre,
            quad_order: None,
            timing: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.degrees.is_empty() {
            return Err(Error::invalid("degrees", "need at least one degree"));
        }
        if !(self.beta.is_finite() && self.beta > 0.0) {
            return Err(Error::invalid("beta", format!("must be positive, got {}", self.beta)));
        }
        if self.grid_points < 2 {
            return Err(Error::invalid("grid_points", "must be at least 2"));
        }
        if !(self.delta1.is_finite() && self.delta1 >= 0.0) {
            return Err(Error::invalid("delta1", "must be nonnegative"));
        }
        if self.quad_order == Some(0) {
            return Err(Error::invalid("quad_order", "must be at least 1"));
        }
        match self.mode {
            ExperimentMode::Tikhonov => {}
            ExperimentMode::Smoothed { epsilon } => {
                if !(epsilon.is_finite() && epsilon > 0.0) {
                    return Err(Error::invalid("epsilon", "must be positive"));
                }
            }
            ExperimentMode::Empirical { m, sigma, replication, .. } => {
                if m == 0 {
                    return Err(Error::invalid("m", "must be at least 1"));
                }
                if !(sigma.is_finite() && sigma >= 0.0) {
                    return Err(Error::invalid("sigma", "must be nonnegative"));
                }
                if replication == 0 {
                    return Err(Error::invalid("replication", "must be at least 1"));
                }
            }
        }
        Ok(())
    }

    pub fn quad_order_for(&self, degree: usize) -> usize {
        self.quad_order.unwrap_or_else(|| default_quad_order(degree))
    }
}

/// Uniform tensor grid with `points` per axis, first coordinate slowest.
pub fn uniform_grid(domain: &crate::measures::BoxDomain, points: usize) -> Vec<Vec<f64>> {
    let axes: Vec<Vec<f64>> = domain
        .lower()
        .iter()
        .zip(domain.upper())
        .map(|(&a, &b)| axis(a, b, points))
        .collect();
    tensor(&axes)
}

fn axis(a: f64, b: f64, points: usize) -> Vec<f64> {
    let h = (b - a) / (points - 1) as f64;
    (0..points)
        .map(|i| if i + 1 == points { b } else { a + h * i as f64 })
        .collect()
}

fn tensor<T: Copy>(axes: &[Vec<T>]) -> Vec<Vec<T>> {
    let mut out: Vec<Vec<T>> = vec![vec![]];
    for ax in axes {
        out = out
            .into_iter()
            .flat_map(|p| {
                ax.iter().map(move |&v| {
                    let mut q = p.clone();
                    q.push(v);
                    q
                })
            })
            .collect();
    }
    out
}

/// True where `x` counts towards the masked error: outside the closed
/// `δ₁`-tubes around the critical points and the boundary. `δ₁ = 0`
/// keeps every point.
pub fn error_mask(function: &FunctionSpec, grid: &[Vec<f64>], delta1: f64) -> Vec<bool> {
    if delta1 == 0.0 {
        return vec![true; grid.len()];
    }
    grid.iter()
        .map(|x| {
            let near_critical = function.critical_x().iter().any(|c| {
                let d2: f64 = c.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
                d2.sqrt() <= delta1
            });
            !near_critical && function.domain().dist_to_boundary(x) > delta1
        })
        .collect()
}

struct Setting {
    grid: Vec<Vec<f64>>,
    f_values: Vec<f64>,
    y_lo: f64,
    y_hi: f64,
}

fn setting(spec: &ExperimentSpec) -> Result<Setting> {
    let grid = uniform_grid(spec.function.domain(), spec.grid_points);
    let f_values = grid
        .iter()
        .map(|x| spec.function.eval(x))
        .collect::<Result<Vec<f64>>>()?;
    let (y_lo, y_hi) = f_values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if !(y_lo.is_finite() && y_hi.is_finite()) {
        return Err(Error::invalid("function", "non-finite values on the grid"));
    }
    Ok(Setting {
        grid,
        f_values,
        y_lo,
        y_hi,
    })
}

fn basis_for(spec: &ExperimentSpec, degree: usize, y_lo: f64, y_hi: f64) -> Result<BasisSpec> {
    let dom = spec.function.domain();
    let mut maps = dom
        .lower()
        .iter()
        .zip(dom.upper())
        .map(|(&a, &b)| AxisMap::from_interval(a, b))
        .collect::<Result<Vec<_>>>()?;
    maps.push(if y_hi > y_lo {
        AxisMap::from_interval(y_lo, y_hi)?
    } else {
        AxisMap::from_interval(y_lo - 1.0, y_lo + 1.0)?
    });
    BasisSpec::new(dom.dim() + 1, degree, spec.family)?.with_scaling(maps)
}

/// Basis used at `degree`: every `x` axis mapped from the domain and `y`
/// mapped from the range of `f` on the evaluation grid onto `[-1, 1]`.
pub fn experiment_basis(spec: &ExperimentSpec, degree: usize) -> Result<BasisSpec> {
    let s = setting(spec)?;
    basis_for(spec, degree, s.y_lo, s.y_hi)
}

fn moments_in(spec: &ExperimentSpec, degree: usize, basis: &BasisSpec) -> Result<MomentMatrix> {
    let quad = spec.quad_order_for(degree);
    let graph_parts = || {
        spec.function
            .pieces()
            .iter()
            .map(|p| {
                let formula = p.formula.clone();
                GraphMeasure::new(move |x| formula.eval(x), p.domain.clone(), quad)
            })
            .collect::<Result<Vec<_>>>()
    };
    match spec.mode {
        ExperimentMode::Tikhonov => {
            let parts = graph_parts()?
                .iter()
                .map(|g| graph_moment_matrix(g, basis))
                .collect::<Result<Vec<_>>>()?;
            MomentMatrix::sum(&parts)
        }
        ExperimentMode::Smoothed { epsilon } => {
            let y_quad = default_quad_order(degree).max(16);
            let parts = graph_parts()?
                .into_iter()
                .map(|g| smoothed_moment_matrix(&SmoothedMeasure::new(g, epsilon, y_quad, true)?, basis))
                .collect::<Result<Vec<_>>>()?;
            MomentMatrix::sum(&parts)
        }
        ExperimentMode::Empirical {
            m,
            sigma,
            replication,
            seed,
        } => {
            let samples = draw_graph_samples(&spec.function, m, seed)?;
            let jittered = jitter_samples(&samples, sigma, replication, seed.wrapping_add(1))?;
            let vol = spec.function.domain().volume();
            Ok(empirical_moment_matrix(&jittered, basis)?.scaled(vol, Normalization::Lebesgue))
        }
    }
}

/// `m` points `(x, f(x))` with `x` uniform on the function's domain.
pub fn draw_graph_samples(function: &FunctionSpec, m: usize, seed: u64) -> Result<SampleSet> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dom = function.domain();
    let mut pts = Vec::with_capacity(m);
    for _ in 0..m {
        let mut x: Vec<f64> = dom
            .lower()
            .iter()
            .zip(dom.upper())
            .map(|(&a, &b)| rng.random_range(a..=b))
            .collect();
        x.push(function.eval(&x)?);
        pts.push(x);
    }
    SampleSet::new(pts)
}

/// Unregularized moment matrix of the experiment's measure at `degree`,
/// in [`experiment_basis`]. Monte Carlo estimates are rescaled to
/// Lebesgue units so that `β` means the same in every mode.
pub fn experiment_moments(spec: &ExperimentSpec, degree: usize) -> Result<MomentMatrix> {
    let basis = experiment_basis(spec, degree)?;
    moments_in(spec, degree, &basis)
}

/// Regularized evaluator at `degree`, restricted to the function's domain.
pub fn experiment_evaluator(spec: &ExperimentSpec, degree: usize) -> Result<ChristoffelEvaluator> {
    spec.validate()?;
    let m = experiment_moments(spec, degree).map_err(|e| e.at_stage("moments"))?;
    evaluator_from(spec, &m).map_err(|e| e.at_stage("evaluator"))
}

fn evaluator_from(spec: &ExperimentSpec, m: &MomentMatrix) -> Result<ChristoffelEvaluator> {
    build_evaluator(m, Mode::Regularized { beta: spec.beta })?.with_domain(spec.function.domain().clone())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegreeApproximant {
    pub d: usize,
    pub samples: Vec<ApproximantSample>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentOutput {
    pub report: ErrorReport,
    pub approximants: Vec<DegreeApproximant>,
}

fn mask_description(delta1: f64) -> String {
    if delta1 == 0.0 {
        "all grid points".to_string()
    } else {
        format!("grid points with dist(x, critical_x) > {delta1} and dist(x, boundary) > {delta1}")
    }
}

/// Runs every degree of `spec` in ascending order of the given list.
///
/// Errors carry the stage (`setup`, `mask`, `moments`, `evaluator`,
/// `approximant`, `metrics`) at which they occurred.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentOutput> {
    spec.validate().map_err(|e| e.at_stage("setup"))?;
    let s = setting(spec).map_err(|e| e.at_stage("setup"))?;
    let mask = error_mask(&spec.function, &s.grid, spec.delta1);
    let included = mask.iter().filter(|&&m| m).count();
    if included == 0 {
        return Err(Error::EmptyMask.at_stage("mask"));
    }
    let weights = tensor(&vec![trapezoid_weights(&axis(0.0, 1.0, spec.grid_points)); spec.function.nvars_x()]);
    let dom = spec.function.domain();
    let weights: Vec<f64> = weights
        .iter()
        .map(|w| {
            w.iter()
                .zip(dom.lower().iter().zip(dom.upper()))
                .map(|(w, (a, b))| w * (b - a))
                .product()
        })
        .collect();
    let cfg = YSearchConfig::new(s.y_lo - 1.0, s.y_hi + 1.0).map_err(|e| e.at_stage("setup"))?;
    let all = vec![true; s.grid.len()];

    let mut rows = Vec::with_capacity(spec.degrees.len());
    let mut approximants = Vec::with_capacity(spec.degrees.len());
    for &d in &spec.degrees {
        let start = Instant::now();
        let basis = basis_for(spec, d, s.y_lo, s.y_hi).map_err(|e| e.at_stage("moments"))?;
        let m = moments_in(spec, d, &basis).map_err(|e| e.at_stage("moments"))?;
        let eval = evaluator_from(spec, &m).map_err(|e| e.at_stage("evaluator"))?;
        let pts = approximant_on_grid(&eval, &s.grid, &cfg).map_err(|e| e.at_stage("approximant"))?;
        let y_star: Vec<f64> = pts.iter().map(|p| p.y_star).collect();

        let metrics = || -> Result<ReportRow> {
            let on_graph = par::try_map(&s.grid, |x| {
                let mut z = x.clone();
                z.push(spec.function.eval(x)?);
                eval.inverse_christoffel(&z)
            })?;
            let max_q = on_graph
                .iter()
                .zip(&mask)
                .filter(|(_, &m)| m)
                .map(|(q, _)| *q)
                .fold(f64::NEG_INFINITY, f64::max);
            Ok(ReportRow {
                d,
                sup_global: sup_error(&s.f_values, &y_star, &all)?,
                sup_masked: sup_error(&s.f_values, &y_star, &mask)?,
                l1: metrics::weighted_l1(&s.f_values, &y_star, &weights)?,
                max_q_on_graph: max_q,
                runtime_ms: 0.0,
            })
        };
        let mut row = metrics().map_err(|e| e.at_stage("metrics"))?;
        if spec.timing {
            row.runtime_ms = start.elapsed().as_secs_f64() * 1e3;
        }
        rows.push(row);
        approximants.push(DegreeApproximant {
            d,
            samples: pts
                .into_iter()
                .zip(&s.f_values)
                .map(|(p, &f)| ApproximantSample {
                    x: p.x,
                    f,
                    y_star: p.y_star,
                    q_min: p.q_min,
                })
                .collect(),
        });
    }
    Ok(ExperimentOutput {
        report: ErrorReport {
            function: spec.function.name().to_string(),
            mask: MaskInfo {
                delta1: spec.delta1,
                critical_x: spec.function.critical_x().to_vec(),
                description: mask_description(spec.delta1),
                included,
                total: s.grid.len(),
            },
            rows,
        },
        approximants,
    })
}
