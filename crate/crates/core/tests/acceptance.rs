//! Acceptance criteria, one PASS/FAIL line each. Exits non-zero on failure.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use cdk::basis::{eval_univariate, BasisSpec, Family};
use cdk::bounds::{
    lower_bound_on_graph, needle_eval, separating_degree, upper_bound_off_graph, NeedleSpec, SeparationInputs,
};
use cdk::christoffel::{build_evaluator, minimize_over_y, Mode, YSearchConfig, DEFAULT_RANK_TOL};
use cdk::measures::{
    box_moment_matrix, empirical_moment_matrix, graph_moment_matrix, BoxDomain, GraphMeasure, MomentMatrix,
    Normalization, Provenance,
};
use cdk::pipeline::{
    catalog, draw_graph_samples, experiment_evaluator, experiment_moments, rate_fit, run_experiment, uniform_grid,
    ExperimentMode, ExperimentSpec, FunctionSpec, CATALOG_NAMES,
};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

/// Name, check and runtime limit in seconds.
type Criterion = (&'static str, fn() -> Outcome, Option<u64>);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn spec(name: &str, degrees: Vec<usize>) -> ExperimentSpec {
    let mut s = ExperimentSpec::new(catalog(name).unwrap(), degrees);
    s.timing = false;
    s
}

fn polynomial_exactness() -> Outcome {
    let mut s = spec("poly-quadratic", vec![4]);
    s.beta = 1e-9;
    s.quad_order = Some(64);
    s.grid_points = 1001;
    let out = run_experiment(&s).map_err(|e| e.to_string())?;
    let err = out.report.rows[0].sup_global;
    ensure(err <= 1e-4, || format!("sup error {err:e} > 1e-4"))?;
    Ok(format!("sup error {err:.3e}"))
}

fn separation_mechanics() -> Outcome {
    let s = spec("sign", vec![12]);
    let m = experiment_moments(&s, 12).map_err(|e| e.to_string())?;
    let e = build_evaluator(&m, Mode::pseudoinverse(DEFAULT_RANK_TOL)).map_err(|e| e.to_string())?;
    let f = s.function.clone();
    let mut checked = 0;
    let mut worst_ratio = 0.0f64;
    for x in uniform_grid(f.domain(), 1001) {
        if x[0].abs() < 0.25 {
            continue;
        }
        let y = f.eval(&x).unwrap();
        let on = e.lambda_value(&[x[0], y]).unwrap();
        let off = e.lambda_value(&[x[0], -y]).unwrap();
        ensure(on > off, || format!("x = {}: Λ(x, f) = {on:e} <= Λ(x, -f) = {off:e}", x[0]))?;
        worst_ratio = worst_ratio.max(off / on);
        checked += 1;
    }
    let mut sweep = spec("sign", (4..=20).collect());
    sweep.delta1 = 0.25;
    let out = run_experiment(&sweep).map_err(|e| e.to_string())?;
    let best = out
        .report
        .rows
        .iter()
        .min_by(|a, b| a.sup_masked.total_cmp(&b.sup_masked))
        .unwrap();
    ensure(best.sup_masked <= 1e-3, || format!("best masked error {:e} at d = {}", best.sup_masked, best.d))?;
    Ok(format!(
        "{checked} grid points separated (max off/on ratio {worst_ratio:.2e}); masked error {:.2e} at d = {}",
        best.sup_masked, best.d
    ))
}

fn needle_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst_decay = f64::NEG_INFINITY;
    for _ in 0..100 {
        let dim = rng.random_range(1..=4);
        let center: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let delta = rng.random_range(0.1..0.9);
        let degree = rng.random_range(1..=30);
        let s = NeedleSpec::new(center.clone(), delta, degree).map_err(|e| e.to_string())?;
        let at_center = needle_eval(&s, &center).unwrap();
        ensure((at_center - 1.0).abs() <= 1e-12, || format!("p(z) = {at_center}"))?;
        let bound = s.decay_bound();
        for i in 0..1000 {
            let dir: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
            let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-12);
            // alternate between the full ball and the annulus δ ≤ r ≤ 1
            let r = if i % 2 == 0 {
                rng.random_range(0.0..=1.0)
            } else {
                rng.random_range(delta..=1.0)
            };
            let p: Vec<f64> = center.iter().zip(&dir).map(|(c, d)| c + d / norm * r).collect();
            let v = needle_eval(&s, &p).unwrap().abs();
            ensure(v <= 1.0 + 1e-12, || format!("|p| = {v} inside the unit ball"))?;
            if r >= delta {
                ensure(v <= bound + 1e-12, || format!("|p| = {v:e} > {bound:e} at r = {r}, δ = {delta}, d = {degree}"))?;
                worst_decay = worst_decay.max(v - bound);
            }
        }
    }
    Ok(format!("100 specs x 1000 points, max |p| - 2^(1-δd) = {worst_decay:.2e}"))
}

fn bound_inequalities() -> Outcome {
    let interior = 0.05;
    let mut min_margin = f64::INFINITY;
    for name in ["poly-quadratic", "abs", "sign"] {
        let f = catalog(name).unwrap();
        let vol = f.domain().volume();
        for d in 1..=12 {
            let s = spec(name, vec![d]);
            let m = experiment_moments(&s, d).map_err(|e| e.to_string())?;
            let e = build_evaluator(&m, Mode::pseudoinverse(DEFAULT_RANK_TOL)).map_err(|e| e.to_string())?;
            let lb = lower_bound_on_graph(vol, d, 1);
            for x in uniform_grid(f.domain(), 201) {
                let near_edge = f
                    .pieces()
                    .iter()
                    .filter(|p| p.domain.contains(&x))
                    .all(|p| p.domain.dist_to_boundary(&x) <= interior);
                if near_edge {
                    continue;
                }
                let l = e.lambda_value(&[x[0], f.eval(&x).unwrap()]).unwrap();
                ensure(l >= lb, || format!("{name}, d = {d}, x = {}: Λ = {l:e} < {lb:e}", x[0]))?;
                min_margin = min_margin.min(l / lb);
            }
        }
    }
    let mut unit_min = f64::INFINITY;
    for n in 1..=2 {
        let dom = BoxDomain::new(vec![-1.0; n], vec![1.0; n], Normalization::Probability).unwrap();
        for d in 0..=20 {
            let m = box_moment_matrix(&dom, &BasisSpec::new(n, d, Family::Legendre).unwrap(), d + 1)
                .map_err(|e| e.to_string())?;
            let e = build_evaluator(&m, Mode::pseudoinverse(DEFAULT_RANK_TOL)).map_err(|e| e.to_string())?;
            let l = e.lambda_value(&vec![0.0; n]).unwrap();
            let floor = ((1 + d) as f64).powi(-2 * n as i32);
            ensure(l >= floor, || format!("unit box n = {n}, d = {d}: Λ(0) = {l:e} < {floor:e}"))?;
            unit_min = unit_min.min(l / floor);
        }
    }
    Ok(format!("min Λ / lower bound on graph {min_margin:.2}, on unit box {unit_min:.2}"))
}

fn degree_certificate() -> Outcome {
    let cert = separating_degree(&SeparationInputs::new(2.0, 1.0, 1, 64).unwrap());
    ensure(cert.d_star_sep == Some(10), || format!("d_star_sep = {:?}", cert.d_star_sep))?;
    let mut prev = usize::MAX;
    for k in 1..=9 {
        let d3 = k as f64 / 10.0;
        let c = separating_degree(&SeparationInputs::new(2.0, d3, 1, 2000).unwrap());
        let d = c.d_star_sep.ok_or_else(|| format!("no separating degree at δ₃ = {d3}"))?;
        ensure(d <= prev, || format!("d_star_sep rose to {d} at δ₃ = {d3}"))?;
        prev = d;
    }
    for (vol, d3, n) in [(2.0, 1.0, 1), (2.0, 0.3, 1), (4.0, 0.7, 2), (0.5, 0.05, 1)] {
        let c = separating_degree(&SeparationInputs::new(vol, d3, n, 300).unwrap());
        for row in &c.table {
            let by_bounds = lower_bound_on_graph(vol, row.d, n) > upper_bound_off_graph(d3, row.d);
            ensure(by_bounds == row.separated, || format!("table disagrees with bounds at d = {}", row.d))?;
        }
        if let Some(ds) = c.d_star_sep {
            ensure(c.table[ds - 1..].iter().all(|r| r.separated), || "tail not separated".into())?;
            ensure(ds == 1 || !c.table[ds - 2].separated, || "d_star_sep not minimal".into())?;
        }
    }
    Ok(format!("d_star_sep = 10; monotone down to {prev} at δ₃ = 0.9"))
}

fn data_driven_consistency() -> Outcome {
    let dom = BoxDomain::interval(-1.0, 1.0).unwrap().with_normalization(Normalization::Probability);
    let basis = BasisSpec::new(2, 4, Family::Legendre).unwrap();
    let g = GraphMeasure::new(|x| x[0], dom.clone(), 16).unwrap();
    let exact = graph_moment_matrix(&g, &basis).map_err(|e| e.to_string())?;
    let line = FunctionSpec::polynomial("line", dom, vec![(vec![1], 1.0)]).unwrap();
    let err = |m: usize, seed: u64| -> f64 {
        let samples = draw_graph_samples(&line, m, seed).unwrap();
        let emp = empirical_moment_matrix(&samples, &basis).unwrap();
        (emp.entries() - exact.entries()).abs().max()
    };
    let wins = (0..20u64).filter(|&seed| err(4000, 1000 + seed) < err(1000, seed)).count();
    ensure(wins >= 15, || format!("m = 4000 better in only {wins} of 20 seeds"))?;

    let tik = spec("poly-quadratic", vec![4]);
    let base = run_experiment(&tik).map_err(|e| e.to_string())?.report.rows[0].clone();
    let mut diffs = Vec::new();
    for eps in [0.1, 0.05, 0.025] {
        let mut s = tik.clone();
        s.mode = ExperimentMode::Smoothed { epsilon: eps };
        let r = run_experiment(&s).map_err(|e| e.to_string())?.report.rows[0].clone();
        diffs.push([
            (r.sup_global - base.sup_global).abs(),
            (r.sup_masked - base.sup_masked).abs(),
            (r.l1 - base.l1).abs(),
            (r.max_q_on_graph - base.max_q_on_graph).abs(),
        ]);
    }
    for w in diffs.windows(2) {
        for (k, (next, prev)) in w[1].iter().zip(&w[0]).enumerate() {
            ensure(next <= prev, || format!("column {k} difference grew: {diffs:?}"))?;
        }
    }
    Ok(format!(
        "m = 4000 wins {wins}/20; smoothed sup-error gap {:.2e} -> {:.2e} -> {:.2e}",
        diffs[0][0], diffs[1][0], diffs[2][0]
    ))
}

fn smooth_rate() -> Outcome {
    let beta = 1e-12;
    let degrees: Vec<usize> = (2..=10).collect();
    let run = |beta: f64| {
        let mut s = spec("exp", degrees.clone());
        s.beta = beta;
        s.quad_order = Some(64);
        run_experiment(&s).map_err(|e| e.to_string())
    };
    let main = run(beta)?.report;
    let reference = run(beta / 100.0)?.report;
    let slope = rate_fit(&main).map_err(|e| e.to_string())?;
    ensure(slope <= -1.0, || format!("slope {slope}"))?;
    // the floor starts where shrinking β by 100 more than halves the error
    let floor_at = main
        .rows
        .iter()
        .zip(&reference.rows)
        .position(|(a, b)| a.sup_masked > 2.0 * b.sup_masked)
        .unwrap_or(main.rows.len());
    ensure(floor_at >= 2, || format!("β-floor reached at d = {}", main.rows[floor_at].d))?;
    let errs: Vec<f64> = main.rows.iter().map(|r| r.sup_masked).collect();
    for k in 1..floor_at {
        ensure(errs[k] < errs[k - 1], || format!("error rose at d = {}: {errs:?}", main.rows[k].d))?;
    }
    let floor_d = main.rows.get(floor_at).map_or("none".to_string(), |r| r.d.to_string());
    Ok(format!("slope {slope:.2}; strictly decreasing before the β-floor at d = {floor_d}"))
}

/// `min pᵀ A p` subject to `pᵀ b = 1`, from the KKT system by LU.
fn constrained_min(a: &DMatrix<f64>, b: &DVector<f64>) -> f64 {
    let n = a.nrows();
    let mut k = DMatrix::zeros(n + 1, n + 1);
    k.view_mut((0, 0), (n, n)).copy_from(a);
    for i in 0..n {
        k[(i, n)] = b[i];
        k[(n, i)] = b[i];
    }
    let mut rhs = DVector::zeros(n + 1);
    rhs[n] = 1.0;
    let sol = k.lu().solve(&rhs).expect("KKT system is regular");
    let p = sol.rows(0, n).into_owned();
    (p.transpose() * a * &p)[(0, 0)]
}

fn oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut worst = 0.0f64;
    for (d, size) in [(1, 3), (2, 6)] {
        let basis = BasisSpec::new(2, d, Family::Legendre).unwrap();
        for _ in 0..50 {
            let a = DMatrix::from_fn(size, size, |_, _| rng.random_range(-1.0..1.0));
            let m = &a * a.transpose();
            let mm = MomentMatrix::from_parts(m.clone(), basis.clone(), Provenance::Quadrature, Normalization::Lebesgue)
                .unwrap();
            let beta = 1e-3;
            let e = build_evaluator(&mm, Mode::Regularized { beta }).unwrap();
            let reg = &m + DMatrix::identity(size, size) * beta;
            for _ in 0..10 {
                let z = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
                let b = DVector::from_vec(cdk::basis::eval_basis_vector(&basis, &z).unwrap());
                let oracle = constrained_min(&reg, &b).min(e.mass());
                let got = e.lambda_value(&z).unwrap();
                let rel = (got - oracle).abs() / oracle;
                ensure(rel <= 1e-10, || format!("Λ = {got:e}, oracle {oracle:e}"))?;
                worst = worst.max(rel);
            }
        }
    }

    let cases: Vec<(String, f64)> = CATALOG_NAMES
        .iter()
        .flat_map(|&name| {
            let f = catalog(name).unwrap();
            let (lo, hi) = (f.domain().lower()[0], f.domain().upper()[0]);
            let mut rng = ChaCha8Rng::seed_from_u64(name.len() as u64);
            (0..20)
                .map(|_| (name.to_string(), rng.random_range(lo..=hi)))
                .collect::<Vec<_>>()
        })
        .collect();
    let evaluators: Vec<_> = CATALOG_NAMES
        .iter()
        .map(|&name| (name, experiment_evaluator(&spec(name, vec![6]), 6).unwrap()))
        .collect();
    let brute_n = 100_000;
    let threads = std::thread::available_parallelism().map_or(4, |n| n.get());
    let chunk = cases.len().div_ceil(threads);
    let results: Vec<Result<f64, String>> = std::thread::scope(|sc| {
        let handles: Vec<_> = cases
            .chunks(chunk)
            .map(|part| {
                let evaluators = &evaluators;
                sc.spawn(move || {
                    part.iter()
                        .map(|(name, x)| {
                            let e = &evaluators.iter().find(|(n, _)| n == name).unwrap().1;
                            let f = catalog(name).unwrap();
                            let fx = f.eval(&[*x]).unwrap();
                            let cfg = YSearchConfig::around_values([fx]).unwrap();
                            let (y, q) = minimize_over_y(e, &[*x], &cfg).map_err(|e| e.to_string())?;
                            let h = (cfg.y_hi - cfg.y_lo) / (brute_n - 1) as f64;
                            let (mut by, mut bq) = (f64::NAN, f64::INFINITY);
                            for i in 0..brute_n {
                                let yy = cfg.y_lo + h * i as f64;
                                let qq = e.inverse_christoffel(&[*x, yy]).unwrap();
                                if qq < bq {
                                    (by, bq) = (yy, qq);
                                }
                            }
                            // the grid can only locate y to within its spacing
                            ensure((y - by).abs() <= h + cfg.refine_tol, || {
                                format!("{name} at x = {x}: y* = {y}, grid argmin {by}")
                            })?;
                            ensure(q <= bq * (1.0 + 1e-12), || {
                                format!("{name} at x = {x}: q(y*) = {q:e} above grid minimum {bq:e}")
                            })?;
                            Ok((y - by).abs())
                        })
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        handles.into_iter().flat_map(|h| h.join().unwrap()).collect()
    });
    let mut max_gap = 0.0f64;
    for r in results {
        max_gap = max_gap.max(r?);
    }
    Ok(format!(
        "Λ vs KKT oracle max rel {worst:.1e}; y-search vs 1e5 grid max |Δy| {max_gap:.1e} over {} cases",
        cases.len()
    ))
}

fn unit_box_closed_form() -> Outcome {
    // Λ_d(0) of the uniform probability box equals 1 / Σ_α ∏ (2α_j + 1) P_{α_j}(0)²
    for n in 1..=2 {
        let dom = BoxDomain::new(vec![-1.0; n], vec![1.0; n], Normalization::Probability).unwrap();
        for d in [3, 8] {
            let basis = BasisSpec::new(n, d, Family::Legendre).unwrap();
            let m = box_moment_matrix(&dom, &basis, d + 1).unwrap();
            let e = build_evaluator(&m, Mode::pseudoinverse(DEFAULT_RANK_TOL)).unwrap();
            let idx = cdk::basis::enumerate_multiindices(&basis).unwrap();
            let s: f64 = idx
                .iter()
                .map(|a| {
                    a.exponents
                        .iter()
                        .map(|&k| (2 * k + 1) as f64 * eval_univariate(Family::Legendre, k as usize, 0.0).powi(2))
                        .product::<f64>()
                })
                .sum();
            let l = e.lambda_value(&vec![0.0; n]).unwrap();
            ensure((l * s - 1.0).abs() < 1e-10, || format!("n = {n}, d = {d}: {l} vs {}", 1.0 / s))?;
        }
    }
    Ok("closed form matched".into())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("1 polynomial exactness", polynomial_exactness, Some(10)),
        ("2 separation mechanics", separation_mechanics, Some(60)),
        ("3 needle polynomial suite", needle_suite, Some(5)),
        ("4 bound inequalities", bound_inequalities, Some(30)),
        ("4 unit box closed form", unit_box_closed_form, None),
        ("5 degree certificate", degree_certificate, Some(1)),
        ("6 data-driven consistency", data_driven_consistency, Some(60)),
        ("7 smooth convergence rate", smooth_rate, Some(60)),
        ("8 oracle equivalence", oracle_equivalence, None),
    ];
    let mut failed = 0;
    for (name, run, limit) in criteria {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let outcome = match (outcome, limit) {
            (Ok(msg), Some(s)) if elapsed > Duration::from_secs(s) => {
                Err(format!("{msg}; took {:.2} s, limit {s} s", elapsed.as_secs_f64()))
            }
            (o, _) => o,
        };
        match outcome {
            Ok(msg) => println!("PASS criterion {name}: {msg} ({:.2} s)", elapsed.as_secs_f64()),
            Err(msg) => {
                failed += 1;
                println!("FAIL criterion {name}: {msg} ({:.2} s)", elapsed.as_secs_f64());
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
