//! Expression trees: the GP genotype.
//!
//! Trees are immutable values; every evolutionary operator builds a new tree.
//! Parameters are numbered in pre-order.

mod diff;
mod parse;
mod ptc2;

use alloc::boxed::Box;
use alloc::vec::Vec;

use crate::constraints::{ConstraintOp, ShapeModel};
use crate::data::Matrix;
use crate::fitness::Model;
use crate::interval::{Domain, Interval, UnaryFn};
use crate::math;
use crate::{Error, Result};

pub use ptc2::{ptc2_random, ptc2_with, FunctionSet};

/// `|denominator|` below which protected division returns 1.
pub const PROTECTED_DIV_EPS: f64 = 1e-12;

#[inline]
pub fn protected_div(num: f64, den: f64) -> f64 {
    if math::abs(den) < PROTECTED_DIV_EPS {
        1.0
    } else {
        num / den
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinaryFn {
    Add,
    Mul,
    /// Protected division (`%`).
    Div,
}

impl BinaryFn {
    pub const ALL: [BinaryFn; 3] = [BinaryFn::Add, BinaryFn::Mul, BinaryFn::Div];

    pub fn apply(self, a: f64, b: f64) -> f64 {
        match self {
            BinaryFn::Add => a + b,
            BinaryFn::Mul => a * b,
            BinaryFn::Div => protected_div(a, b),
        }
    }

    pub fn apply_interval(self, a: Interval, b: Interval) -> Interval {
        match self {
            BinaryFn::Add => a + b,
            BinaryFn::Mul => a * b,
            BinaryFn::Div => a / b,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            BinaryFn::Add => '+',
            BinaryFn::Mul => '*',
            BinaryFn::Div => '%',
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Param(f64),
    Var(usize),
    Unary(UnaryFn, Box<Expr>),
    Binary(BinaryFn, Box<Expr>, Box<Expr>),
}

/// Shape information for one node, indexed in pre-order.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NodeInfo {
    /// Node count of the subtree rooted here.
    pub size: usize,
    /// Level of the node; the root is at level 1.
    pub level: usize,
    /// Depth of the subtree rooted here; a leaf has height 1.
    pub height: usize,
}

impl Expr {
    pub fn var(i: usize) -> Expr {
        Expr::Var(i)
    }

    pub fn param(v: f64) -> Expr {
        Expr::Param(v)
    }

    pub fn unary(f: UnaryFn, a: Expr) -> Expr {
        Expr::Unary(f, Box::new(a))
    }

    pub fn binary(op: BinaryFn, a: Expr, b: Expr) -> Expr {
        Expr::Binary(op, Box::new(a), Box::new(b))
    }

    pub fn add(a: Expr, b: Expr) -> Expr {
        Self::binary(BinaryFn::Add, a, b)
    }

    pub fn mul(a: Expr, b: Expr) -> Expr {
        Self::binary(BinaryFn::Mul, a, b)
    }

    pub fn div(a: Expr, b: Expr) -> Expr {
        Self::binary(BinaryFn::Div, a, b)
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, Expr::Param(_) | Expr::Var(_))
    }

    /// Number of nodes.
    pub fn len(&self) -> usize {
        match self {
            Expr::Param(_) | Expr::Var(_) => 1,
            Expr::Unary(_, a) => 1 + a.len(),
            Expr::Binary(_, a, b) => 1 + a.len() + b.len(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Expr::Param(_) | Expr::Var(_) => 1,
            Expr::Unary(_, a) => 1 + a.depth(),
            Expr::Binary(_, a, b) => 1 + a.depth().max(b.depth()),
        }
    }

    /// Largest variable index referenced, if any.
    pub fn max_var(&self) -> Option<usize> {
        match self {
            Expr::Param(_) => None,
            Expr::Var(i) => Some(*i),
            Expr::Unary(_, a) => a.max_var(),
            Expr::Binary(_, a, b) => match (a.max_var(), b.max_var()) {
                (Some(x), Some(y)) => Some(x.max(y)),
                (x, y) => x.or(y),
            },
        }
    }

    pub fn param_count(&self) -> usize {
        match self {
            Expr::Param(_) => 1,
            Expr::Var(_) => 0,
            Expr::Unary(_, a) => a.param_count(),
            Expr::Binary(_, a, b) => a.param_count() + b.param_count(),
        }
    }

    /// Parameter values in pre-order.
    pub fn params(&self) -> Vec<f64> {
        let mut out = Vec::new();
        self.visit_params(&mut |v| out.push(v));
        out
    }

    fn visit_params(&self, f: &mut impl FnMut(f64)) {
        match self {
            Expr::Param(v) => f(*v),
            Expr::Var(_) => {}
            Expr::Unary(_, a) => a.visit_params(f),
            Expr::Binary(_, a, b) => {
                a.visit_params(f);
                b.visit_params(f);
            }
        }
    }

    /// Copy of the tree with parameters replaced, in pre-order.
    pub fn with_params(&self, theta: &[f64]) -> Result<Expr> {
        let expected = self.param_count();
        if theta.len() != expected {
            return Err(Error::ParameterCount {
                expected,
                found: theta.len(),
            });
        }
        let mut it = theta.iter().copied();
        Ok(self.map_params(&mut |_| it.next().unwrap_or(f64::NAN)))
    }

    /// Rebuilds the tree with every parameter passed through `f`.
    pub fn map_params(&self, f: &mut impl FnMut(f64) -> f64) -> Expr {
        match self {
            Expr::Param(v) => Expr::Param(f(*v)),
            Expr::Var(i) => Expr::Var(*i),
            Expr::Unary(op, a) => Expr::unary(*op, a.map_params(f)),
            Expr::Binary(op, a, b) => {
                let a = a.map_params(f);
                let b = b.map_params(f);
                Expr::binary(*op, a, b)
            }
        }
    }

    /// Vectorised evaluation over the rows of `x`.
    pub fn eval(&self, x: &Matrix) -> Vec<f64> {
        match self {
            Expr::Param(v) => alloc::vec![*v; x.rows()],
            Expr::Var(i) => x.column(*i),
            Expr::Unary(f, a) => {
                let mut v = a.eval(x);
                v.iter_mut().for_each(|t| *t = f.apply(*t));
                v
            }
            Expr::Binary(op, a, b) => {
                let mut va = a.eval(x);
                let vb = b.eval(x);
                va.iter_mut()
                    .zip(vb)
                    .for_each(|(p, q)| *p = op.apply(*p, q));
                va
            }
        }
    }

    pub fn eval_row(&self, row: &[f64]) -> f64 {
        match self {
            Expr::Param(v) => *v,
            Expr::Var(i) => row[*i],
            Expr::Unary(f, a) => f.apply(a.eval_row(row)),
            Expr::Binary(op, a, b) => op.apply(a.eval_row(row), b.eval_row(row)),
        }
    }

    /// Pointwise value together with a flag telling whether the
    /// protected-division guard fired anywhere in the tree.
    pub fn eval_row_guarded(&self, row: &[f64]) -> (f64, bool) {
        match self {
            Expr::Param(v) => (*v, false),
            Expr::Var(i) => (row[*i], false),
            Expr::Unary(f, a) => {
                let (v, g) = a.eval_row_guarded(row);
                (f.apply(v), g)
            }
            Expr::Binary(op, a, b) => {
                let (va, ga) = a.eval_row_guarded(row);
                let (vb, gb) = b.eval_row_guarded(row);
                let guard = *op == BinaryFn::Div && math::abs(vb) < PROTECTED_DIV_EPS;
                (op.apply(va, vb), ga || gb || guard)
            }
        }
    }

    /// Interval enclosure over a box; parameters become point intervals.
    pub fn eval_interval(&self, domain: &Domain) -> Interval {
        match self {
            Expr::Param(v) => Interval::point(*v),
            Expr::Var(i) => {
                if *i < domain.dim() {
                    domain.get(*i)
                } else {
                    Interval::UNDEFINED
                }
            }
            Expr::Unary(f, a) => a.eval_interval(domain).unary(*f),
            Expr::Binary(op, a, b) => {
                op.apply_interval(a.eval_interval(domain), b.eval_interval(domain))
            }
        }
    }

    /// Per-node shape information in pre-order.
    pub fn node_infos(&self) -> Vec<NodeInfo> {
        let mut out = Vec::with_capacity(self.len());
        self.collect_infos(1, &mut out);
        out
    }

    fn collect_infos(&self, level: usize, out: &mut Vec<NodeInfo>) -> (usize, usize) {
        let slot = out.len();
        out.push(NodeInfo {
            size: 1,
            level,
            height: 1,
        });
        let (size, height) = match self {
            Expr::Param(_) | Expr::Var(_) => (1, 1),
            Expr::Unary(_, a) => {
                let (s, h) = a.collect_infos(level + 1, out);
                (1 + s, 1 + h)
            }
            Expr::Binary(_, a, b) => {
                let (sa, ha) = a.collect_infos(level + 1, out);
                let (sb, hb) = b.collect_infos(level + 1, out);
                (1 + sa + sb, 1 + ha.max(hb))
            }
        };
        out[slot].size = size;
        out[slot].height = height;
        (size, height)
    }

    /// Subtree rooted at pre-order index `index`.
    pub fn subtree(&self, index: usize) -> &Expr {
        let mut node = self;
        let mut index = index;
        loop {
            if index == 0 {
                return node;
            }
            index -= 1;
            node = match node {
                Expr::Param(_) | Expr::Var(_) => panic!("subtree index out of range"),
                Expr::Unary(_, a) => a,
                Expr::Binary(_, a, b) => {
                    let la = a.len();
                    if index < la {
                        a
                    } else {
                        index -= la;
                        b
                    }
                }
            };
        }
    }

    /// Copy of the tree with the subtree at pre-order `index` replaced.
    pub fn replace_subtree(&self, index: usize, with: Expr) -> Expr {
        if index == 0 {
            return with;
        }
        match self {
            Expr::Param(_) | Expr::Var(_) => panic!("subtree index out of range"),
            Expr::Unary(f, a) => Expr::unary(*f, a.replace_subtree(index - 1, with)),
            Expr::Binary(op, a, b) => {
                let la = a.len();
                if index - 1 < la {
                    Expr::binary(*op, a.replace_subtree(index - 1, with), (**b).clone())
                } else {
                    Expr::binary(*op, (**a).clone(), b.replace_subtree(index - 1 - la, with))
                }
            }
        }
    }

    /// Checks that every variable index is below `dim`.
    pub fn check_dim(&self, dim: usize) -> Result<()> {
        match self.max_var() {
            Some(v) if v >= dim => Err(Error::DimensionMismatch {
                expected: dim,
                found: v + 1,
            }),
            _ => Ok(()),
        }
    }
}

impl Model for Expr {
    fn predict(&self, x: &Matrix) -> Vec<f64> {
        self.eval(x)
    }
}

impl ShapeModel for Expr {
    fn bound(&self, op: ConstraintOp, domain: &Domain) -> Interval {
        match op {
            ConstraintOp::Image => self.eval_interval(domain),
            ConstraintOp::Derivative { var, order } => {
                self.differentiate(var, order).eval_interval(domain)
            }
        }
    }

    fn pointwise(&self, op: ConstraintOp) -> Box<dyn Fn(&[f64]) -> f64 + '_> {
        match op {
            ConstraintOp::Image => Box::new(move |row| self.eval_row(row)),
            ConstraintOp::Derivative { var, order } => {
                let d = self.differentiate(var, order);
                Box::new(move |row| d.eval_row(row))
            }
        }
    }
}
