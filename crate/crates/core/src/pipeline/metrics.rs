//! Error metrics of an approximant against the true function.

use crate::error::{Error, Result};
use crate::par::CompensatedSum;

use super::report::ErrorReport;

fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::Dimension { expected, got });
    }
    Ok(())
}

/// `max |f - y*|` over entries where `mask` is true.
pub fn sup_error(f_values: &[f64], y_star: &[f64], mask: &[bool]) -> Result<f64> {
    check_len(f_values.len(), y_star.len())?;
    check_len(f_values.len(), mask.len())?;
    f_values
        .iter()
        .zip(y_star)
        .zip(mask)
        .filter(|(_, &m)| m)
        .map(|((f, y), _)| (f - y).abs())
        .reduce(f64::max)
        .ok_or(Error::EmptyMask)
}

/// Trapezoid weights of a sorted one-dimensional grid.
pub fn trapezoid_weights(grid: &[f64]) -> Vec<f64> {
    let n = grid.len();
    let mut w = vec![0.0; n];
    for i in 1..n {
        let h = 0.5 * (grid[i] - grid[i - 1]);
        w[i - 1] += h;
        w[i] += h;
    }
    w
}

/// Trapezoidal `∫ |f - y*|` over a one-dimensional grid.
pub fn l1_error(f_values: &[f64], y_star: &[f64], x_grid: &[f64]) -> Result<f64> {
    check_len(f_values.len(), y_star.len())?;
    check_len(f_values.len(), x_grid.len())?;
    weighted_l1(f_values, y_star, &trapezoid_weights(x_grid))
}

pub(crate) fn weighted_l1(f_values: &[f64], y_star: &[f64], weights: &[f64]) -> Result<f64> {
    let mut s = CompensatedSum::default();
    for ((f, y), w) in f_values.iter().zip(y_star).zip(weights) {
        s.add(w * (f - y).abs());
    }
    Ok(s.value())
}

/// Errors below this are treated as exact recovery and left out of fits.
pub const PLATEAU_FLOOR: f64 = 10.0 * f64::EPSILON;

/// Least-squares slope of `log(error)` against `log(d)`.
pub fn rate_fit_points(points: &[(usize, f64)]) -> Result<f64> {
    let usable: Vec<(f64, f64)> = points
        .iter()
        .filter(|(d, e)| *d > 0 && e.is_finite() && *e >= PLATEAU_FLOOR)
        .map(|&(d, e)| ((d as f64).ln(), e.ln()))
        .collect();
    if usable.len() < 3 {
        return Err(Error::RateFit(usable.len()));
    }
    let n = usable.len() as f64;
    let mx = usable.iter().map(|p| p.0).sum::<f64>() / n;
    let my = usable.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = usable.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = usable.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::RateFit(1));
    }
    Ok(sxy / sxx)
}

/// [`rate_fit_points`] on the masked sup errors of a report.
pub fn rate_fit(report: &ErrorReport) -> Result<f64> {
    let pts: Vec<(usize, f64)> = report.rows.iter().map(|r| (r.d, r.sup_masked)).collect();
    rate_fit_points(&pts)
}
