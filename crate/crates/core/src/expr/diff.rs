//! Symbolic differentiation with light constant folding.

use super::{BinaryFn, Expr, PROTECTED_DIV_EPS};
use crate::interval::UnaryFn;
use crate::math;

#[derive(Clone, Copy)]
enum Target {
    Var(usize),
    Param(usize),
}

fn is_const(e: &Expr, v: f64) -> bool {
    matches!(e, Expr::Param(p) if *p == v)
}

fn c(v: f64) -> Expr {
    Expr::Param(v)
}

fn add(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (Expr::Param(x), Expr::Param(y)) => c(x + y),
        _ if is_const(&a, 0.0) => b,
        _ if is_const(&b, 0.0) => a,
        _ => Expr::add(a, b),
    }
}

fn mul(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (Expr::Param(x), Expr::Param(y)) => c(x * y),
        _ if is_const(&a, 0.0) || is_const(&b, 0.0) => c(0.0),
        _ if is_const(&a, 1.0) => b,
        _ if is_const(&b, 1.0) => a,
        _ => Expr::mul(a, b),
    }
}

fn div(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (Expr::Param(x), Expr::Param(y)) if math::abs(*y) >= PROTECTED_DIV_EPS => c(x / y),
        _ if is_const(&a, 0.0) => c(0.0),
        _ if is_const(&b, 1.0) => a,
        _ => Expr::div(a, b),
    }
}

fn neg(a: Expr) -> Expr {
    mul(c(-1.0), a)
}

fn unary(f: UnaryFn, a: Expr) -> Expr {
    match a {
        Expr::Param(v) => c(f.apply(v)),
        a => Expr::unary(f, a),
    }
}

impl Expr {
    /// Partial derivative of order `order` with respect to variable `var`.
    /// Protected division is differentiated as ordinary division.
    pub fn differentiate(&self, var: usize, order: u8) -> Expr {
        let mut d = self.clone();
        for _ in 0..order {
            d = d.derive(Target::Var(var), &mut 0);
        }
        d
    }

    /// Derivative with respect to the `j`-th parameter (pre-order).
    pub fn param_gradient(&self, j: usize) -> Expr {
        self.derive(Target::Param(j), &mut 0)
    }

    fn derive(&self, target: Target, counter: &mut usize) -> Expr {
        match self {
            Expr::Param(_) => {
                let idx = *counter;
                *counter += 1;
                match target {
                    Target::Param(j) if j == idx => c(1.0),
                    _ => c(0.0),
                }
            }
            Expr::Var(i) => match target {
                Target::Var(k) if k == *i => c(1.0),
                _ => c(0.0),
            },
            Expr::Unary(f, u) => {
                let du = u.derive(target, counter);
                if is_const(&du, 0.0) {
                    return du;
                }
                let u = (**u).clone();
                match f {
                    UnaryFn::Log => div(du, u),
                    UnaryFn::Exp => mul(du, unary(UnaryFn::Exp, u)),
                    UnaryFn::Sin => mul(du, unary(UnaryFn::Cos, u)),
                    UnaryFn::Cos => mul(du, neg(unary(UnaryFn::Sin, u))),
                    UnaryFn::Tanh => {
                        let t = unary(UnaryFn::Tanh, u);
                        mul(du, add(c(1.0), neg(unary(UnaryFn::Square, t))))
                    }
                    UnaryFn::Square => mul(mul(c(2.0), u), du),
                    UnaryFn::Sqrt => div(du, mul(c(2.0), unary(UnaryFn::Sqrt, u))),
                    UnaryFn::Log1p => div(du, add(c(1.0), u)),
                }
            }
            Expr::Binary(op, u, v) => {
                let du = u.derive(target, counter);
                let dv = v.derive(target, counter);
                match op {
                    BinaryFn::Add => add(du, dv),
                    BinaryFn::Mul => add(mul(du, (**v).clone()), mul((**u).clone(), dv)),
                    BinaryFn::Div => {
                        let v = (**v).clone();
                        let num = add(mul(du, v.clone()), neg(mul((**u).clone(), dv)));
                        div(num, unary(UnaryFn::Square, v))
                    }
                }
            }
        }
    }
}
