//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails. Pass criterion numbers as arguments to
//! run a subset, e.g. `cargo test --test acceptance -- 3 8`.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use rand::Rng;
use shapesr::experiment::{run_once, RunOutcome};
use shapesr::problem::{builtin_problem, Problem};
use shapesr::report::{median, report_overhead};
use shapesr::{Algorithm, RunOptions, RunRecord};
use shapesr_core::expr::{ptc2_random, BinaryFn};
use shapesr_core::fitness::nmse;
use shapesr_core::itea::{
    fit_weights_ols, negative_interaction, positive_interaction, random_terms, ItConfig,
};
use shapesr_core::localopt::{optimize, LmConfig};
use shapesr_core::problems::{Builtin, Formula};
use shapesr_core::{seeded_rng, Domain, Expr, ItExpression, Matrix, Model};

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Outcome {
            pass,
            detail: detail.into(),
        }
    }
}

type Criterion = (usize, &'static str, fn() -> Outcome);

const CRITERIA: [Criterion; 11] = [
    (1, "interval containment fuzz", c1_containment),
    (2, "derivative correctness", c2_derivatives),
    (3, "interaction algebra", c3_interactions),
    (4, "noise floor", c4_noise_floor),
    (5, "feasibility guarantee", c5_feasibility),
    (6, "infeasibility of unconstrained search", c6_unconstrained),
    (7, "easy-problem recovery", c7_recovery),
    (8, "LM non-worsening", c8_lm),
    (9, "OLS recovery", c9_ols),
    (10, "determinism", c10_determinism),
    (11, "overhead measurement", c11_overhead),
];

fn main() -> ExitCode {
    let only: Vec<usize> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let mut failed = 0;
    let mut ran = 0;
    for (n, name, f) in CRITERIA {
        if !only.is_empty() && !only.contains(&n) {
            continue;
        }
        let start = Instant::now();
        let out = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Outcome::new(false, format!("panicked: {msg}"))
        });
        let verdict = if out.pass { "PASS" } else { "FAIL" };
        println!(
            "criterion {n:>2} {verdict} {name}: {} [{:.1}s]",
            out.detail,
            start.elapsed().as_secs_f64()
        );
        ran += 1;
        failed += usize::from(!out.pass);
    }
    println!("acceptance: {} of {ran} criteria passed", ran - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn random_box(rng: &mut impl Rng, dim: usize, lo: f64, hi: f64) -> Domain {
    let pairs: Vec<(f64, f64)> = (0..dim)
        .map(|_| {
            let a = rng.random_range(lo..hi);
            (a, a + rng.random_range(0.01..3.0))
        })
        .collect();
    Domain::from_pairs(&pairs).unwrap()
}

fn random_it(rng: &mut impl Rng, dim: usize, weight: f64) -> ItExpression {
    let terms = random_terms(&ItConfig::default(), dim, rng);
    let weights: Vec<f64> = terms
        .iter()
        .map(|_| rng.random_range(-weight..weight))
        .collect();
    ItExpression::new(terms, weights, rng.random_range(-weight..weight)).unwrap()
}

const CONTAINMENT_SLACK: f64 = 1e-9;
const TRIPLES: usize = 100_000;

fn c1_containment() -> Outcome {
    let mut rng = seeded_rng(1);
    let mut x = vec![0.0; 3];

    let (mut tree_checked, mut tree_missed, mut guarded) = (0usize, 0usize, 0usize);
    let mut first_miss = None;
    while tree_checked < TRIPLES {
        let dim = rng.random_range(1..=3);
        let e = ptc2_random(30, 10, dim, &mut rng);
        let d = random_box(&mut rng, dim, -3.0, 3.0);
        let iv = e.eval_interval(&d);
        for _ in 0..100 {
            d.sample(&mut rng, &mut x[..dim]);
            if !iv.is_defined() {
                continue;
            }
            let (v, guard) = e.eval_row_guarded(&x[..dim]);
            if guard {
                guarded += 1;
                continue;
            }
            tree_checked += 1;
            if !iv.contains_with_slack(v, CONTAINMENT_SLACK) {
                tree_missed += 1;
                first_miss.get_or_insert_with(|| format!("{e} over {d:?}: {iv} misses {v}"));
            }
        }
    }

    let (mut it_checked, mut it_missed) = (0usize, 0usize);
    while it_checked < TRIPLES {
        let f = random_it(&mut rng, 3, 2.0);
        let d = random_box(&mut rng, 3, -1.0, 3.0);
        let iv = f.image(&d);
        if !iv.is_defined() {
            continue;
        }
        for _ in 0..100 {
            d.sample(&mut rng, &mut x);
            it_checked += 1;
            let v = f.eval_row(&x);
            if !iv.contains_with_slack(v, CONTAINMENT_SLACK) {
                it_missed += 1;
                first_miss.get_or_insert_with(|| format!("{f} over {d:?}: {iv} misses {v}"));
            }
        }
    }
    let mut detail = format!(
        "tree {tree_missed}/{tree_checked} outside ({guarded} guarded rows skipped), IT {it_missed}/{it_checked} outside"
    );
    if let Some(m) = first_miss {
        detail += &format!("; first: {m}");
    }
    Outcome::new(tree_missed == 0 && it_missed == 0, detail)
}

const DERIVATIVE_TOL: f64 = 1e-4;

fn has_small_denominator(e: &Expr, x: &[f64]) -> bool {
    match e {
        Expr::Param(_) | Expr::Var(_) => false,
        Expr::Unary(_, a) => has_small_denominator(a, x),
        Expr::Binary(op, a, b) => {
            (*op == BinaryFn::Div && b.eval_row(x).abs() <= 0.1)
                || has_small_denominator(a, x)
                || has_small_denominator(b, x)
        }
    }
}

/// Whether some subtree overflows at `x`; the derivative tree then meets
/// `0 * inf` style artefacts that finite differences cannot see.
fn overflows(e: &Expr, x: &[f64]) -> bool {
    let v = e.eval_row(x);
    if !v.is_finite() || v.abs() > 1e100 {
        return true;
    }
    match e {
        Expr::Param(_) | Expr::Var(_) => false,
        Expr::Unary(_, a) => overflows(a, x),
        Expr::Binary(_, a, b) => overflows(a, x) || overflows(b, x),
    }
}

/// Central differences with steps `h` and `2h`; `None` near kinks, poles or
/// overflow, where the two disagree.
fn stable_central_difference(f: impl Fn(f64) -> f64, h: f64) -> Option<f64> {
    if !f(0.0).is_finite() || f(0.0).abs() > 1e6 {
        return None;
    }
    let fd = (f(h) - f(-h)) / (2.0 * h);
    let fd2 = (f(2.0 * h) - f(-2.0 * h)) / (4.0 * h);
    if !fd.is_finite() || fd.abs() > 1e6 || !((fd - fd2).abs() <= 1e-6 * fd.abs().max(1.0)) {
        return None;
    }
    Some(fd)
}

fn c2_derivatives() -> Outcome {
    let mut rng = seeded_rng(2);
    let h = 1e-5;
    let (mut tree_cmp, mut tree_bad, mut it_cmp, mut it_bad) = (0usize, 0usize, 0usize, 0usize);
    let mut first_bad = None;
    for _ in 0..1000 {
        let e = ptc2_random(20, 8, 2, &mut rng);
        let var = rng.random_range(0..2);
        let de = e.differentiate(var, 1);
        for _ in 0..100 {
            let x = [rng.random_range(0.2..2.0), rng.random_range(0.2..2.0)];
            if has_small_denominator(&e, &x) || overflows(&e, &x) {
                continue;
            }
            let at = |dx: f64| {
                let mut p = x;
                p[var] += dx;
                e.eval_row(&p)
            };
            let (Some(fd), sd) = (stable_central_difference(at, h), de.eval_row(&x)) else {
                continue;
            };
            tree_cmp += 1;
            if !((fd - sd).abs() <= DERIVATIVE_TOL * fd.abs().max(1.0)) {
                tree_bad += 1;
                first_bad.get_or_insert_with(|| {
                    format!("{e} d/dx{var} at {x:?}: fd {fd}, symbolic {sd}")
                });
            }
        }
    }
    for _ in 0..1000 {
        let f = random_it(&mut rng, 3, 2.0);
        for _ in 0..100 {
            let x: Vec<f64> = (0..3).map(|_| rng.random_range(0.5..1.5)).collect();
            let var = rng.random_range(0..3);
            let at = |dx: f64| {
                let mut p = x.clone();
                p[var] += dx;
                f.eval_row(&p)
            };
            let Some(fd) = stable_central_difference(at, h) else {
                continue;
            };
            let ad = f.derivative_row(var, 1, &x);
            it_cmp += 1;
            if !((fd - ad).abs() <= DERIVATIVE_TOL * fd.abs().max(1.0)) {
                it_bad += 1;
                first_bad.get_or_insert_with(|| {
                    format!("{f} d/dx{var} at {x:?}: fd {fd}, chain rule {ad}")
                });
            }
        }
    }
    let mut detail = format!(
        "tree {tree_bad}/{tree_cmp} mismatched, IT {it_bad}/{it_cmp} mismatched (of 100000 points each; rest near singularities)"
    );
    if let Some(m) = first_bad {
        detail += &format!("; first: {m}");
    }
    // most sampled points must be usable for the comparison to mean anything
    let enough = tree_cmp >= 50_000 && it_cmp >= 50_000;
    Outcome::new(enough && tree_bad == 0 && it_bad == 0, detail)
}

fn c3_interactions() -> Outcome {
    let (a, b) = ([2, 3], [-1, 1]);
    let pos = positive_interaction(&a, &b);
    let neg = negative_interaction(&a, &b);
    Outcome::new(
        pos == [1, 4] && neg == [3, 2],
        format!("x1^2 x2^3 with x1^-1 x2: + gives {pos:?}, - gives {neg:?}"),
    )
}

fn c4_noise_floor() -> Outcome {
    let (lo, hi) = (0.10, 0.50);
    let mut all = Vec::new();
    let mut outside = Vec::new();
    for b in Builtin::ALL {
        for seed in 0..20 {
            let p = builtin_problem(b, true, seed).unwrap();
            let v = 100.0 * nmse(&Formula(b).predict(&p.train.x), &p.train.y);
            if !(lo..=hi).contains(&v) {
                outside.push(format!("{} seed {seed}: {v:.3}%", b.name()));
            }
            all.push(v);
        }
    }
    let min = all.iter().copied().fold(f64::INFINITY, f64::min);
    let max = all.iter().copied().fold(0.0, f64::max);
    let mean = all.iter().sum::<f64>() / all.len() as f64;
    let mut detail = format!(
        "{} problem/seed pairs, NMSE in [{min:.3}%, {max:.3}%], mean {mean:.3}%, required [{lo:.2}%, {hi:.2}%]",
        all.len()
    );
    if !outside.is_empty() {
        detail += &format!("; outside: {}", outside.join(", "));
    }
    Outcome::new(outside.is_empty(), detail)
}

const AUDIT_SAMPLES: usize = 100_000;
const RUNS: u64 = 10;

fn desk_scale(algorithm: Algorithm) -> RunOptions {
    let (pop, gens) = match algorithm {
        Algorithm::Gp | Algorithm::Gpc => (200, 50),
        Algorithm::Itea | Algorithm::Fiit => (100, 50),
    };
    RunOptions {
        population_size: Some(pop),
        generations: Some(gens),
        audit_samples: AUDIT_SAMPLES,
        allow_empty_constraints: false,
    }
}

fn runs(p: &Problem, algorithm: Algorithm, constraints: bool) -> Vec<RunRecord> {
    (0..RUNS)
        .map(|seed| {
            run_once(p, algorithm, constraints, &desk_scale(algorithm), seed)
                .unwrap()
                .record
        })
        .collect()
}

fn audit_failures(rs: &[RunRecord]) -> usize {
    rs.iter()
        .filter(|r| r.audit.as_ref().is_some_and(|a| !a.feasible))
        .count()
}

fn c5_feasibility() -> Outcome {
    let problems = [
        Builtin::AircraftLift,
        Builtin::FlowPsi,
        Builtin::FuelFlow,
        Builtin::I6_20,
        Builtin::I15_3x,
    ];
    let mut parts = Vec::new();
    let mut pass = true;
    for b in problems {
        let p = builtin_problem(b, true, 0).unwrap();
        for algorithm in [Algorithm::Gp, Algorithm::Fiit] {
            let rs = runs(&p, algorithm, true);
            let returned = rs.iter().filter(|r| r.found).count();
            let bad = audit_failures(&rs);
            pass &= bad == 0 && rs.iter().filter(|r| r.found).all(|r| r.audit.is_some());
            parts.push(format!("{} {algorithm} {bad}/{returned}", b.name()));
        }
    }
    Outcome::new(
        pass,
        format!("infeasible/returned models: {}", parts.join(", ")),
    )
}

fn c6_unconstrained() -> Outcome {
    let mut parts = Vec::new();
    let mut pass = true;
    for b in [Builtin::AircraftLift, Builtin::FlowPsi] {
        let p = builtin_problem(b, true, 0).unwrap();
        for algorithm in [Algorithm::Gp, Algorithm::Itea] {
            let rs = runs(&p, algorithm, false);
            let bad = audit_failures(&rs);
            pass &= bad >= 1;
            parts.push(format!("{} {algorithm} {bad}/{}", b.name(), rs.len()));
        }
    }
    Outcome::new(
        pass,
        format!("runs failing the audit: {}", parts.join(", ")),
    )
}

fn c7_recovery() -> Outcome {
    let p = builtin_problem(Builtin::FuelFlow, false, 0).unwrap();
    let defaults = RunOptions::default();
    let mut parts = Vec::new();
    let mut pass = true;
    for algorithm in [Algorithm::Gp, Algorithm::Itea] {
        let tests: Vec<f64> = (0..RUNS)
            .map(|seed| {
                run_once(&p, algorithm, false, &defaults, seed)
                    .unwrap()
                    .record
                    .test_nmse
            })
            .collect();
        let m = median(&tests);
        pass &= m <= 0.10;
        parts.push(format!("{algorithm} median test NMSE {m:.4}%"));
    }
    Outcome::new(pass, format!("{} (required <= 0.10%)", parts.join(", ")))
}

fn sse(p: &[f64], y: &[f64]) -> f64 {
    p.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
}

fn c8_lm() -> Outcome {
    let mut rng = seeded_rng(8);
    let (mut worse, mut improved, mut finite) = (0, 0, 0);
    for _ in 0..1000 {
        let dim = rng.random_range(1..=3);
        let e = ptc2_random(20, 8, dim, &mut rng);
        let rows: Vec<Vec<f64>> = (0..30)
            .map(|_| (0..dim).map(|_| rng.random_range(-2.0..2.0)).collect())
            .collect();
        let x = Matrix::from_rows(&rows).unwrap();
        let target = random_it(&mut rng, dim, 2.0);
        let y: Vec<f64> = rows
            .iter()
            .map(|r| {
                let v = target.eval_row(r);
                if v.is_finite() {
                    v
                } else {
                    r.iter().sum()
                }
            })
            .collect();
        let before = sse(&e.predict(&x), &y);
        let after = sse(&optimize(&e, &LmConfig::default(), &x, &y).predict(&x), &y);
        if before.is_finite() {
            finite += 1;
            if after > before {
                worse += 1;
            } else if after < before {
                improved += 1;
            }
        } else if after.is_finite() {
            worse += 1;
        }
    }
    Outcome::new(
        worse == 0,
        format!("{worse} of 1000 worsened ({finite} finite starts, {improved} improved)"),
    )
}

/// Spectral condition number of the raw design matrix.
fn condition_number(design: &[Vec<f64>]) -> f64 {
    let (n, p) = (design.len(), design[0].len());
    let s = nalgebra::DMatrix::from_fn(n, p, |i, j| design[i][j]).singular_values();
    s.max() / s.min()
}

const OLS_TOL: f64 = 1e-6;
const MAX_CONDITION: f64 = 1e6;

fn c9_ols() -> Outcome {
    let mut rng = seeded_rng(9);
    let (mut instances, mut bad, mut skipped, mut overflowed) = (0, 0, 0, 0);
    let mut worst: f64 = 0.0;
    while instances < 1000 {
        let f = random_it(&mut rng, 3, 5.0);
        let rows: Vec<Vec<f64>> = (0..100)
            .map(|_| (0..3).map(|_| rng.random_range(0.5..2.0)).collect())
            .collect();
        let x = Matrix::from_rows(&rows).unwrap();
        let y = f.predict(&x);
        let design: Vec<Vec<f64>> = rows
            .iter()
            .map(|r| {
                std::iter::once(1.0)
                    .chain(f.terms.iter().map(|t| t.eval_row(r)))
                    .collect()
            })
            .collect();
        let finite = y
            .iter()
            .chain(design.iter().flatten())
            .all(|v| v.is_finite());
        if !finite {
            overflowed += 1;
            continue;
        }
        if !(condition_number(&design) <= MAX_CONDITION) {
            skipped += 1;
            continue;
        }
        instances += 1;
        let fit = fit_weights_ols(&f.terms, &x, &y);
        let err = f
            .weights
            .iter()
            .zip(&fit.weights)
            .chain(std::iter::once((&f.intercept, &fit.intercept)))
            .map(|(a, b)| (a - b).abs() / a.abs().max(1.0))
            .fold(0.0, f64::max);
        worst = worst.max(err);
        if !(err < OLS_TOL) {
            bad += 1;
        }
    }
    Outcome::new(
        bad == 0,
        format!(
            "{bad} of {instances} refits off by >= {OLS_TOL:e}, worst {worst:.2e} (skipped draws: {skipped} with condition > {MAX_CONDITION:e}, {overflowed} overflowing)"
        ),
    )
}

fn fingerprint(p: &Problem, out: &RunOutcome) -> (Option<String>, String) {
    let file = out.model_file(p.spec.variables()).map(|f| f.to_toml());
    let mut r = out.record.clone();
    r.wall_time = 0.0;
    (file, serde_json::to_string(&r).unwrap())
}

fn c10_determinism() -> Outcome {
    let p = builtin_problem(Builtin::FuelFlow, true, 0).unwrap();
    let opts = RunOptions {
        population_size: Some(50),
        generations: Some(10),
        audit_samples: 1000,
        allow_empty_constraints: false,
    };
    let mut parts = Vec::new();
    let mut pass = true;
    for algorithm in Algorithm::ALL {
        let a = run_once(&p, algorithm, true, &opts, 42).unwrap();
        let b = run_once(&p, algorithm, true, &opts, 42).unwrap();
        let same = fingerprint(&p, &a) == fingerprint(&p, &b) && a.log == b.log;
        pass &= same;
        parts.push(format!(
            "{algorithm} {}",
            if same { "identical" } else { "differs" }
        ));
    }
    Outcome::new(pass, parts.join(", "))
}

fn c11_overhead() -> Outcome {
    let p = builtin_problem(Builtin::FuelFlow, true, 0).unwrap();
    let mut records = Vec::new();
    for (algorithm, constraints) in [
        (Algorithm::Gp, false),
        (Algorithm::Gp, true),
        (Algorithm::Itea, false),
        (Algorithm::Fiit, true),
    ] {
        let opts = RunOptions {
            audit_samples: 0,
            ..desk_scale(algorithm)
        };
        for seed in 0..3 {
            records.push(
                run_once(&p, algorithm, constraints, &opts, seed)
                    .unwrap()
                    .record,
            );
        }
    }
    let rows = report_overhead(&records);
    let parts: Vec<String> = rows
        .iter()
        .map(|r| {
            format!(
                "{} {:.3}s vs {:.3}s, ratio {:.2}x",
                if r.family == Algorithm::Itea {
                    "FIIT/ITEA".to_string()
                } else {
                    format!("{}", r.family)
                },
                r.constrained_time,
                r.unconstrained_time,
                r.ratio
            )
        })
        .collect();
    let computed = rows.len() == 2 && rows.iter().all(|r| r.ratio.is_finite());
    Outcome::new(
        computed,
        format!("{} on noisy Fuel flow (informational)", parts.join("; ")),
    )
}
