//! Embedded invariant checks run by `cdk selftest`.

use cdk::basis::{eval_univariate, Family};
use cdk::bounds::{erf1, needle_eval, separating_degree, NeedleSpec, SeparationInputs};
use cdk::measures::gauss_legendre_rule;

type Check = fn() -> Result<(), String>;

fn needle_bounds() -> Result<(), String> {
    for (delta, degree) in [(0.1, 5), (0.5, 8), (0.9, 30)] {
        let s = NeedleSpec::new(vec![0.0, 0.0], delta, degree).map_err(|e| e.to_string())?;
        let center = needle_eval(&s, &[0.0, 0.0]).map_err(|e| e.to_string())?;
        if center != 1.0 {
            return Err(format!("p(z) = {center}"));
        }
        for k in 0..=200 {
            let r = k as f64 / 200.0;
            let t = 0.7 * k as f64;
            let v = needle_eval(&s, &[r * t.cos(), r * t.sin()]).map_err(|e| e.to_string())?.abs();
            let cap = if r >= delta { s.decay_bound() } else { 1.0 };
            if v > cap + 1e-12 {
                return Err(format!("|p| = {v} > {cap} at r = {r}, δ = {delta}, d = {degree}"));
            }
        }
    }
    Ok(())
}

fn legendre_recurrence() -> Result<(), String> {
    let explicit = |k: usize, t: f64| match k {
        0 => 1.0,
        1 => t,
        2 => 0.5 * (3.0 * t * t - 1.0),
        3 => 0.5 * (5.0 * t.powi(3) - 3.0 * t),
        4 => (35.0 * t.powi(4) - 30.0 * t * t + 3.0) / 8.0,
        _ => (63.0 * t.powi(5) - 70.0 * t.powi(3) + 15.0 * t) / 8.0,
    };
    for k in 0..=5 {
        for i in 0..=20 {
            let t = -1.0 + 0.1 * i as f64;
            let (a, b) = (eval_univariate(Family::Legendre, k, t), explicit(k, t));
            if (a - b).abs() > 1e-13 {
                return Err(format!("P_{k}({t}) = {a}, expected {b}"));
            }
        }
    }
    Ok(())
}

fn gauss_legendre_exactness() -> Result<(), String> {
    for order in [1, 2, 5, 16, 64] {
        let (x, w) = gauss_legendre_rule(order).map_err(|e| e.to_string())?;
        for k in 0..2 * order {
            let got: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(k as i32)).sum();
            let exact = if k % 2 == 0 { 2.0 / (k + 1) as f64 } else { 0.0 };
            if (got - exact).abs() > 1e-13 {
                return Err(format!("order {order}, x^{k}: {got} vs {exact}"));
            }
        }
    }
    Ok(())
}

fn erf_constant() -> Result<(), String> {
    let v = erf1();
    if (v - 0.842_700_792_949_714_9).abs() <= 1e-15 {
        Ok(())
    } else {
        Err(format!("erf(1) = {v}"))
    }
}

fn separating_degree_example() -> Result<(), String> {
    let inp = SeparationInputs::new(2.0, 1.0, 1, 64).map_err(|e| e.to_string())?;
    match separating_degree(&inp).d_star_sep {
        Some(10) => Ok(()),
        other => Err(format!("d_star_sep = {other:?}, expected 10")),
    }
}

pub const CHECKS: [(&str, Check); 5] = [
    ("needle-bounds", needle_bounds),
    ("legendre-recurrence", legendre_recurrence),
    ("gauss-legendre-exactness", gauss_legendre_exactness),
    ("erf1-constant", erf_constant),
    ("separating-degree-example", separating_degree_example),
];

/// Prints one line per check and reports whether all passed.
pub fn run() -> bool {
    let mut ok = true;
    for (name, check) in CHECKS {
        match check() {
            Ok(()) => println!("PASS {name}"),
            Err(msg) => {
                ok = false;
                println!("FAIL {name}: {msg}");
            }
        }
    }
    ok
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_checks_pass() {
        for (name, check) in CHECKS {
            assert!(check().is_ok(), "{name}");
        }
    }
}
