//! Gauss-Legendre rules and their tensor products over boxes.

use std::f64::consts::PI;

use crate::error::{Error, Result};

const MAX_NEWTON: usize = 100;

/// Gauss-Legendre nodes (ascending) and weights on `[-1, 1]`.
///
/// Nodes are Newton-refined roots of `P_order`, evaluated by the three-term
/// recurrence. The rule integrates polynomials of degree `2 * order - 1`
/// exactly.
pub fn gauss_legendre_rule(order: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if order == 0 {
        return Err(Error::invalid("order", "must be at least 1"));
    }
    let n = order;
    let nf = n as f64;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    // roots are symmetric; solve the upper half and mirror
    for i in 0..n.div_ceil(2) {
        let mut t = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut converged = false;
        let mut dp = 0.0;
        for _ in 0..MAX_NEWTON {
            let (p, d) = legendre_with_derivative(n, t);
            dp = d;
            let step = p / d;
            t -= step;
            if step.abs() <= 4.0 * f64::EPSILON * t.abs().max(1.0) {
                converged = true;
                dp = legendre_with_derivative(n, t).1;
                break;
            }
        }
        if !converged {
            return Err(Error::QuadratureConvergence { order, index: i });
        }
        let w = 2.0 / ((1.0 - t * t) * dp * dp);
        nodes[n - 1 - i] = t;
        nodes[i] = -t;
        weights[n - 1 - i] = w;
        weights[i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    Ok((nodes, weights))
}

/// `(P_n(t), P_n'(t))`.
fn legendre_with_derivative(n: usize, t: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = t;
    for k in 1..n {
        let kf = k as f64;
        let p2 = ((2.0 * kf + 1.0) * t * p1 - kf * p0) / (kf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let nf = n as f64;
    let d = nf * (t * p1 - p0) / (t * t - 1.0);
    (p1, d)
}

/// Tensor Gauss-Legendre rule mapped onto the box `[lower, upper]`.
///
/// Nodes are listed row-major: the first coordinate varies slowest.
pub fn tensor_rule(lower: &[f64], upper: &[f64], order: usize) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    let (t, w) = gauss_legendre_rule(order)?;
    let dim = lower.len();
    let total = order
        .checked_pow(dim as u32)
        .ok_or_else(|| Error::invalid("quad_order", "tensor grid too large"))?;
    let half: Vec<f64> = lower.iter().zip(upper).map(|(a, b)| 0.5 * (b - a)).collect();
    let mid: Vec<f64> = lower.iter().zip(upper).map(|(a, b)| 0.5 * (a + b)).collect();
    let mut nodes = Vec::with_capacity(total);
    let mut weights = Vec::with_capacity(total);
    let mut idx = vec![0usize; dim];
    for _ in 0..total {
        let mut p = Vec::with_capacity(dim);
        let mut wt = 1.0;
        for (j, &k) in idx.iter().enumerate() {
            p.push(mid[j] + half[j] * t[k]);
            wt *= half[j] * w[k];
        }
        nodes.push(p);
        weights.push(wt);
        for j in (0..dim).rev() {
            idx[j] += 1;
            if idx[j] < order {
                break;
            }
            idx[j] = 0;
        }
    }
    Ok((nodes, weights))
}
