use proptest::prelude::*;
use rand::Rng;
use shapesr_core::constraints::{
    audit_empirical, check_pessimistic, ConstraintSet, ShapeConstraint,
};
use shapesr_core::expr::{ptc2_random, BinaryFn};
use shapesr_core::fitness::{evaluate, Model};
use shapesr_core::itea::{negative_interaction, positive_interaction, random_terms, ItConfig};
use shapesr_core::localopt::{optimize, LmConfig};
use shapesr_core::{seeded_rng, Domain, Expr, Interval, ItExpression, Matrix, UnaryFn};

fn interval() -> impl Strategy<Value = Interval> {
    (-50.0f64..50.0, 0.0f64..20.0).prop_map(|(lo, w)| Interval::new(lo, lo + w))
}

fn point_in(iv: Interval, t: f64) -> f64 {
    (iv.lo() + t * iv.width()).min(iv.hi())
}

const SLACK: f64 = 1e-12;

fn binary_ops() -> Vec<(
    &'static str,
    fn(Interval, Interval) -> Interval,
    fn(f64, f64) -> f64,
)> {
    vec![
        ("add", |a, b| a + b, |x, y| x + y),
        ("sub", |a, b| a - b, |x, y| x - y),
        ("mul", |a, b| a * b, |x, y| x * y),
        ("div", |a, b| a / b, |x, y| x / y),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    // 256 cases x 400 points per op
    #[test]
    fn binary_containment(a in interval(), b in interval(), seed in any::<u64>()) {
        let mut rng = seeded_rng(seed);
        for (name, iop, op) in binary_ops() {
            let r = iop(a, b);
            if !r.is_defined() {
                continue;
            }
            for _ in 0..400 {
                let x = point_in(a, rng.random());
                let y = point_in(b, rng.random());
                let v = op(x, y);
                prop_assert!(r.contains_with_slack(v, SLACK), "{name}: {a} {b} -> {r} misses {v}");
            }
        }
    }

    #[test]
    fn unary_containment(a in interval(), k in -4i32..=4, seed in any::<u64>()) {
        let mut rng = seeded_rng(seed);
        for f in UnaryFn::ALL {
            let r = a.unary(f);
            if !r.is_defined() {
                continue;
            }
            for _ in 0..400 {
                let x = point_in(a, rng.random());
                prop_assert!(r.contains_with_slack(f.apply(x), SLACK), "{f:?} {a} -> {r} at {x}");
            }
        }
        let p = a.pow_int(k);
        if p.is_defined() {
            for _ in 0..400 {
                let x = point_in(a, rng.random());
                prop_assert!(p.contains_with_slack(libm::pow(x, k as f64), 1e-9));
            }
        }
        let s = a.scale(1.0 / 50.0).asin();
        if s.is_defined() {
            for _ in 0..100 {
                let x = point_in(a, rng.random()) / 50.0;
                prop_assert!(s.contains_with_slack(libm::asin(x), SLACK));
            }
        }
    }

    #[test]
    fn monotone_inclusion(a in interval(), b in interval(), ea in 0.0f64..3.0, eb in 0.0f64..3.0) {
        let wa = Interval::new(a.lo() - ea, a.hi() + ea);
        let wb = Interval::new(b.lo() - eb, b.hi() + eb);
        for (name, iop, _) in binary_ops() {
            let (n, w) = (iop(a, b), iop(wa, wb));
            if n.is_defined() && w.is_defined() {
                prop_assert!(n.is_subset_of(&w), "{name}");
            }
            // a defined wide result implies a defined narrow result
            if w.is_defined() {
                prop_assert!(n.is_defined());
            }
        }
        for f in UnaryFn::ALL {
            let (n, w) = (a.unary(f), wa.unary(f));
            if n.is_defined() && w.is_defined() {
                prop_assert!(n.is_subset_of(&w), "{f:?}");
            }
        }
    }

    #[test]
    fn point_intervals_match_scalars(x in -20.0f64..20.0, y in -20.0f64..20.0) {
        let (a, b) = (Interval::point(x), Interval::point(y));
        for (name, iop, op) in binary_ops() {
            let r = iop(a, b);
            let v = op(x, y);
            if r.is_defined() {
                prop_assert!(r.contains_with_slack(v, 1e-15) && r.width() <= 1e-12 * v.abs().max(1.0), "{name}");
            }
        }
        for f in UnaryFn::ALL {
            let r = a.unary(f);
            if r.is_defined() {
                prop_assert!(r.lo() == f.apply(x) && r.hi() == f.apply(x), "{f:?}");
            }
        }
    }

    #[test]
    fn dependency_pessimism(lo in -10.0f64..10.0, w in 0.0f64..10.0) {
        let a = Interval::new(lo, lo + w);
        prop_assert_eq!(a - a, Interval::new(lo - (lo + w), (lo + w) - lo));
    }

    #[test]
    fn expression_text_round_trip(seed in any::<u64>()) {
        let mut rng = seeded_rng(seed);
        let e = ptc2_random(30, 10, 4, &mut rng);
        let back: Expr = e.to_string().parse().unwrap();
        prop_assert_eq!(back, e);
    }

    #[test]
    fn interactions_are_inverse(a in prop::collection::vec(-4i32..=4, 1..8), b_seed in any::<u64>()) {
        let mut rng = seeded_rng(b_seed);
        let b: Vec<i32> = a.iter().map(|_| rng.random_range(-4..=4)).collect();
        prop_assert_eq!(negative_interaction(&positive_interaction(&a, &b), &b), a.clone());
        prop_assert_eq!(positive_interaction(&negative_interaction(&a, &b), &b), a);
    }
}

fn random_box(rng: &mut impl Rng, dim: usize) -> Domain {
    let pairs: Vec<(f64, f64)> = (0..dim)
        .map(|_| {
            let lo = rng.random_range(-3.0..3.0);
            (lo, lo + rng.random_range(0.01..3.0))
        })
        .collect();
    Domain::from_pairs(&pairs).unwrap()
}

#[test]
fn tree_containment_over_random_boxes() {
    let mut rng = seeded_rng(101);
    let mut checked = 0;
    let mut x = vec![0.0; 3];
    for _ in 0..300 {
        let e = ptc2_random(30, 10, 3, &mut rng);
        let d = random_box(&mut rng, 3);
        let iv = e.eval_interval(&d);
        if !iv.is_defined() {
            continue;
        }
        for _ in 0..1000 {
            d.sample(&mut rng, &mut x);
            let (v, guard) = e.eval_row_guarded(&x);
            if guard {
                continue;
            }
            assert!(
                iv.contains_with_slack(v, 1e-9),
                "{e} over {d:?}: {iv} misses {v}"
            );
            checked += 1;
        }
    }
    assert!(checked > 10_000);
}

#[test]
fn tree_derivatives_match_finite_differences() {
    let mut rng = seeded_rng(7);
    let mut compared = 0;
    for _ in 0..200 {
        let e = ptc2_random(20, 8, 2, &mut rng);
        let var = rng.random_range(0..2);
        let de = e.differentiate(var, 1);
        for _ in 0..100 {
            let x = [rng.random_range(0.2..2.0), rng.random_range(0.2..2.0)];
            if has_small_denominator(&e, &x) {
                continue;
            }
            let h = 1e-5;
            let (mut xp, mut xm) = (x, x);
            xp[var] += h;
            xm[var] -= h;
            let fd = (e.eval_row(&xp) - e.eval_row(&xm)) / (2.0 * h);
            let sd = de.eval_row(&x);
            if !fd.is_finite() || !sd.is_finite() || fd.abs() > 1e6 {
                continue;
            }
            // second-difference check filters out points near kinks and poles
            let fd2 = (e.eval_row(&[
                x[0] + if var == 0 { 2.0 * h } else { 0.0 },
                x[1] + if var == 1 { 2.0 * h } else { 0.0 },
            ]) - e.eval_row(&[
                x[0] - if var == 0 { 2.0 * h } else { 0.0 },
                x[1] - if var == 1 { 2.0 * h } else { 0.0 },
            ])) / (4.0 * h);
            if !((fd - fd2).abs() <= 1e-6 * fd.abs().max(1.0)) {
                continue;
            }
            assert!(
                (fd - sd).abs() <= 1e-4 * fd.abs().max(1.0),
                "{e} d/dx{var} at {x:?}: fd {fd} sym {sd}"
            );
            compared += 1;
        }
    }
    assert!(compared > 5_000, "{compared}");
}

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

#[test]
fn ptc2_respects_limits() {
    let mut rng = seeded_rng(3);
    for _ in 0..100_000 {
        let e = ptc2_random(50, 20, 5, &mut rng);
        assert!(e.len() <= 50 && e.depth() <= 20);
    }
}

#[test]
fn pessimistic_feasible_implies_audit_clean() {
    let mut rng = seeded_rng(55);
    let mut feasible = 0;
    for _ in 0..3000 {
        let e = ptc2_random(12, 6, 2, &mut rng);
        let d = random_box(&mut rng, 2);
        let tuple = [rng.random_range(-1..=1), rng.random_range(-1..=1)];
        let bounds = rng.random_bool(0.3).then(|| (-5.0, 5.0));
        let cs = ConstraintSet::from_monotonicity(&tuple, d, bounds).unwrap();
        if cs.is_empty() || !check_pessimistic(&e, &cs).is_feasible() {
            continue;
        }
        feasible += 1;
        assert!(
            audit_empirical(&e, &cs, 2000, &mut rng).is_feasible(),
            "{e}"
        );
    }
    assert!(feasible > 100, "{feasible}");
}

#[test]
fn evaluation_is_bounded_and_affine_invariant() {
    let mut rng = seeded_rng(9);
    let rows: Vec<[f64; 2]> = (0..50)
        .map(|_| [rng.random_range(0.1..2.0), rng.random_range(0.1..2.0)])
        .collect();
    let x = Matrix::from_rows(&rows).unwrap();
    let y: Vec<f64> = rows.iter().map(|r| r[0] * r[1] + libm::sin(r[0])).collect();
    let cs = ConstraintSet::unconstrained(Domain::from_pairs(&[(0.1, 2.0), (0.1, 2.0)]).unwrap());
    for _ in 0..500 {
        let e = ptc2_random(20, 8, 2, &mut rng);
        let ev = evaluate(&e, &x, &y, &cs);
        assert!((0.0..=1.0).contains(&ev.nmse));
        if ev.nmse >= 0.999 {
            continue;
        }
        let alpha = if rng.random_bool(0.5) { 3.0 } else { -0.5 };
        let affine = Expr::add(Expr::mul(Expr::param(alpha), e.clone()), Expr::param(1.5));
        let ev2 = evaluate(&affine, &x, &y, &cs);
        assert!(
            (ev.nmse - ev2.nmse).abs() < 1e-6 * ev.nmse.max(1e-3),
            "{e}: {} vs {}",
            ev.nmse,
            ev2.nmse
        );
    }
}

#[test]
fn lm_preserves_structure_and_never_worsens() {
    let mut rng = seeded_rng(21);
    for _ in 0..300 {
        let e = ptc2_random(20, 8, 2, &mut rng);
        let rows: Vec<[f64; 2]> = (0..30)
            .map(|_| [rng.random_range(0.1..2.0), rng.random_range(-1.0..1.0)])
            .collect();
        let x = Matrix::from_rows(&rows).unwrap();
        let y: Vec<f64> = rows.iter().map(|r| libm::exp(0.3 * r[0]) + r[1]).collect();
        let before = sse(&e.predict(&x), &y);
        let out = optimize(&e, &LmConfig::default(), &x, &y);
        let zero_e = e.map_params(&mut |_| 0.0);
        let zero_out = out.map_params(&mut |_| 0.0);
        assert_eq!(zero_e, zero_out);
        if before.is_finite() {
            assert!(sse(&out.predict(&x), &y) <= before);
        }
    }
}

#[test]
fn parameter_gradients_match_finite_differences() {
    let mut rng = seeded_rng(33);
    let x = [0.7, 1.3];
    for _ in 0..300 {
        let e = ptc2_random(15, 6, 2, &mut rng);
        let theta = e.params();
        for j in 0..theta.len() {
            let g = e.param_gradient(j).eval_row(&x);
            let h = 1e-6 * theta[j].abs().max(1.0);
            let mut tp = theta.clone();
            let mut tm = theta.clone();
            tp[j] += h;
            tm[j] -= h;
            let fd = (e.with_params(&tp).unwrap().eval_row(&x)
                - e.with_params(&tm).unwrap().eval_row(&x))
                / (2.0 * h);
            if !fd.is_finite() || !g.is_finite() || fd.abs() > 1e5 || has_small_denominator(&e, &x)
            {
                continue;
            }
            let tp2: Vec<f64> = tp
                .iter()
                .zip(&theta)
                .map(|(a, b)| b + 2.0 * (a - b))
                .collect();
            let tm2: Vec<f64> = tm
                .iter()
                .zip(&theta)
                .map(|(a, b)| b + 2.0 * (a - b))
                .collect();
            let fd2 = (e.with_params(&tp2).unwrap().eval_row(&x)
                - e.with_params(&tm2).unwrap().eval_row(&x))
                / (4.0 * h);
            if !((fd - fd2).abs() <= 1e-6 * fd.abs().max(1.0)) {
                continue;
            }
            assert!(
                (fd - g).abs() <= 1e-4 * fd.abs().max(1.0),
                "{e} theta{j}: {fd} vs {g}"
            );
        }
    }
}

fn sse(p: &[f64], y: &[f64]) -> f64 {
    p.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
}

#[test]
fn it_containment_and_derivatives() {
    let cfg = ItConfig::default();
    let mut rng = seeded_rng(71);
    let mut x = vec![0.0; 3];
    for _ in 0..500 {
        let terms = random_terms(&cfg, 3, &mut rng);
        let weights: Vec<f64> = terms.iter().map(|_| rng.random_range(-2.0..2.0)).collect();
        let f = ItExpression::new(terms, weights, rng.random_range(-1.0..1.0)).unwrap();
        let pairs: Vec<(f64, f64)> = (0..3)
            .map(|_| {
                let lo = rng.random_range(0.2..2.0);
                (lo, lo + rng.random_range(0.01..1.0))
            })
            .collect();
        let d = Domain::from_pairs(&pairs).unwrap();
        let img = f.image(&d);
        let der: Vec<Interval> = (0..3).map(|j| f.derivative_interval(j, 1, &d)).collect();
        let der2: Vec<Interval> = (0..3).map(|j| f.derivative_interval(j, 2, &d)).collect();
        for _ in 0..100 {
            d.sample(&mut rng, &mut x);
            if img.is_defined() {
                assert!(img.contains_with_slack(f.eval_row(&x), 1e-9), "{f}");
            }
            for j in 0..3 {
                if der[j].is_defined() {
                    assert!(
                        der[j].contains_with_slack(f.derivative_row(j, 1, &x), 1e-9),
                        "{f} d{j}"
                    );
                }
                if der2[j].is_defined() {
                    assert!(
                        der2[j].contains_with_slack(f.derivative_row(j, 2, &x), 1e-9),
                        "{f} dd{j}"
                    );
                }
            }
        }
    }
}

#[test]
fn it_derivatives_match_finite_differences() {
    let cfg = ItConfig::default();
    let mut rng = seeded_rng(72);
    let mut compared = 0;
    for _ in 0..500 {
        let terms = random_terms(&cfg, 3, &mut rng);
        let weights: Vec<f64> = terms.iter().map(|_| rng.random_range(-2.0..2.0)).collect();
        let f = ItExpression::new(terms, weights, 0.0).unwrap();
        for _ in 0..20 {
            let x: Vec<f64> = (0..3).map(|_| rng.random_range(0.5..1.5)).collect();
            for j in 0..3 {
                let h = 1e-5;
                let at = |dx: f64| {
                    let mut p = x.clone();
                    p[j] += dx;
                    f.eval_row(&p)
                };
                if at(0.0).abs() > 1e6 {
                    continue;
                }
                let fd = (at(h) - at(-h)) / (2.0 * h);
                let fd2 = (at(2.0 * h) - at(-2.0 * h)) / (4.0 * h);
                let ad = f.derivative_row(j, 1, &x);
                if !fd.is_finite()
                    || fd.abs() > 1e6
                    || !((fd - fd2).abs() <= 1e-6 * fd.abs().max(1.0))
                {
                    continue;
                }
                assert!(
                    (fd - ad).abs() <= 1e-4 * fd.abs().max(1.0),
                    "{f} d{j}: {fd} vs {ad}"
                );
                compared += 1;
            }
        }
    }
    assert!(compared > 10_000, "{compared}");
}

#[test]
fn adding_constraints_is_monotone_for_it() {
    let cfg = ItConfig::default();
    let mut rng = seeded_rng(5);
    let d = Domain::from_pairs(&[(0.5, 2.0), (0.5, 2.0)]).unwrap();
    for _ in 0..200 {
        let terms = random_terms(&cfg, 2, &mut rng);
        let w = vec![1.0; terms.len()];
        let f = ItExpression::new(terms, w, 0.0).unwrap();
        let mut cs = ConstraintSet::unconstrained(d.clone());
        let mut last = 0.0;
        for c in [
            ShapeConstraint::non_decreasing(0),
            ShapeConstraint::non_increasing(1),
            ShapeConstraint::upper_bound(1.0),
        ] {
            cs.push(c);
            let t = check_pessimistic(&f, &cs).total();
            assert!(t >= last);
            last = t;
        }
    }
}
