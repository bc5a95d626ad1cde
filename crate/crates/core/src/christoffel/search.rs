//! Recovering `f(x)` as the minimizer over `y` of the inverse Christoffel
//! function: coarse grid scan, then golden-section refinement of the most
//! promising local minima.

use serde::{Deserialize, Serialize};

use super::{ChristoffelEvaluator, Mode};
use crate::error::{Error, Result};
use crate::par;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct YSearchConfig {
    pub y_lo: f64,
    pub y_hi: f64,
    pub coarse_points: usize,
    pub refine_candidates: usize,
    pub refine_tol: f64,
}

impl YSearchConfig {
    /// Interval `[y_lo, y_hi]` with 257 coarse points, 5 candidates and a
    /// refinement width of `1e-10`.
    pub fn new(y_lo: f64, y_hi: f64) -> Result<Self> {
        let cfg = YSearchConfig {
            y_lo,
            y_hi,
            coarse_points: 257,
            refine_candidates: 5,
            refine_tol: 1e-10,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// `[min f - 1, max f + 1]` over the given function values.
    pub fn around_values(values: impl IntoIterator<Item = f64>) -> Result<Self> {
        let (lo, hi) = values
            .into_iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
        YSearchConfig::new(lo - 1.0, hi + 1.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.y_lo.is_finite() && self.y_hi.is_finite() && self.y_lo < self.y_hi) {
            return Err(Error::invalid(
                "y interval",
                format!("need finite y_lo < y_hi, got [{}, {}]", self.y_lo, self.y_hi),
            ));
        }
        if self.coarse_points < 3 {
            return Err(Error::invalid("coarse_points", "must be at least 3"));
        }
        if self.refine_candidates == 0 {
            return Err(Error::invalid("refine_candidates", "must be at least 1"));
        }
        if !(self.refine_tol.is_finite() && self.refine_tol > 0.0) {
            return Err(Error::invalid("refine_tol", "must be positive"));
        }
        Ok(())
    }
}

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Golden-section search for a local minimum of `f` on `[a, b]`, stopping
/// once the bracket is narrower than `tol`. Returns `(x, f(x))`.
pub fn golden_section<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
        // bracket stopped shrinking in floating point
        if c >= d {
            break;
        }
    }
    if fc <= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// `(y*, q(x))` with `y* = argmin_y b(x,y)ᵀ (M + βI)⁻¹ b(x,y)`.
///
/// Ties between equal minima go to the smaller `y`.
pub fn minimize_over_y(eval: &ChristoffelEvaluator, x: &[f64], cfg: &YSearchConfig) -> Result<(f64, f64)> {
    if !matches!(eval.mode(), Mode::Regularized { .. }) {
        return Err(Error::NotRegularized);
    }
    cfg.validate()?;
    if let Some(dom) = eval.domain() {
        if !dom.contains(x) {
            return Err(Error::OutsideDomain { point: x.to_vec() });
        }
    }
    let mut slice = eval.y_slice(x)?;
    let m = cfg.coarse_points;
    let h = (cfg.y_hi - cfg.y_lo) / (m - 1) as f64;
    let ys: Vec<f64> = (0..m).map(|i| cfg.y_lo + h * i as f64).collect();
    let gs: Vec<f64> = ys.iter().map(|&y| slice.eval(y)).collect();

    let mut minima: Vec<usize> = (0..m)
        .filter(|&i| (i == 0 || gs[i] <= gs[i - 1]) && (i + 1 == m || gs[i] <= gs[i + 1]))
        .collect();
    minima.sort_by(|&a, &b| gs[a].total_cmp(&gs[b]).then(a.cmp(&b)));
    minima.truncate(cfg.refine_candidates);

    let mut best = (f64::NAN, f64::INFINITY);
    for &i in &minima {
        let a = ys[i.saturating_sub(1)];
        let b = ys[(i + 1).min(m - 1)];
        let (y, g) = golden_section(|y| slice.eval(y), a, b, cfg.refine_tol);
        let cand = if g <= gs[i] { (y, g) } else { (ys[i], gs[i]) };
        if cand.1 < best.1 || (cand.1 == best.1 && cand.0 < best.0) {
            best = cand;
        }
    }
    let (y_star, _) = best;
    let mut z = x.to_vec();
    z.push(y_star);
    Ok((y_star, eval.inverse_christoffel(&z)?))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApproximantPoint {
    pub x: Vec<f64>,
    pub y_star: f64,
    pub q_min: f64,
}

/// [`minimize_over_y`] over a grid, in grid order.
pub fn approximant_on_grid(
    eval: &ChristoffelEvaluator,
    grid: &[Vec<f64>],
    cfg: &YSearchConfig,
) -> Result<Vec<ApproximantPoint>> {
    par::try_map(grid, |x| {
        minimize_over_y(eval, x, cfg).map(|(y_star, q_min)| ApproximantPoint {
            x: x.clone(),
            y_star,
            q_min,
        })
    })
}
