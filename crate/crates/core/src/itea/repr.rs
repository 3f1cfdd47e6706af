//! Interaction-Transformation expressions and their closed-form bounds.

use alloc::boxed::Box;
use alloc::vec::Vec;
use core::fmt;

use crate::constraints::{ConstraintOp, ShapeModel};
use crate::data::Matrix;
use crate::fitness::Model;
use crate::interval::{Domain, Interval, UnaryFn};
use crate::math;
use crate::{Error, Result};

/// Transformation functions applied to an interaction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Transform {
    Id,
    Sin,
    Cos,
    Tanh,
    Sqrt,
    Log,
    Log1p,
    Exp,
}

impl Transform {
    pub const ALL: [Transform; 8] = [
        Transform::Id,
        Transform::Sin,
        Transform::Cos,
        Transform::Tanh,
        Transform::Sqrt,
        Transform::Log,
        Transform::Log1p,
        Transform::Exp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Transform::Id => "id",
            Transform::Sin => "sin",
            Transform::Cos => "cos",
            Transform::Tanh => "tanh",
            Transform::Sqrt => "sqrt",
            Transform::Log => "log",
            Transform::Log1p => "log1p",
            Transform::Exp => "exp",
        }
    }

    pub fn from_name(s: &str) -> Option<Transform> {
        Transform::ALL.into_iter().find(|t| t.name() == s)
    }

    fn unary(self) -> Option<UnaryFn> {
        match self {
            Transform::Id => None,
            Transform::Sin => Some(UnaryFn::Sin),
            Transform::Cos => Some(UnaryFn::Cos),
            Transform::Tanh => Some(UnaryFn::Tanh),
            Transform::Sqrt => Some(UnaryFn::Sqrt),
            Transform::Log => Some(UnaryFn::Log),
            Transform::Log1p => Some(UnaryFn::Log1p),
            Transform::Exp => Some(UnaryFn::Exp),
        }
    }

    pub fn apply(self, p: f64) -> f64 {
        self.unary().map_or(p, |f| f.apply(p))
    }

    /// First derivative at `p`.
    pub fn d1(self, p: f64) -> f64 {
        match self {
            Transform::Id => 1.0,
            Transform::Sin => math::cos(p),
            Transform::Cos => -math::sin(p),
            Transform::Tanh => {
                let t = math::tanh(p);
                1.0 - t * t
            }
            Transform::Sqrt => 0.5 / math::sqrt(p),
            Transform::Log => 1.0 / p,
            Transform::Log1p => 1.0 / (1.0 + p),
            Transform::Exp => math::exp(p),
        }
    }

    /// Second derivative at `p`.
    pub fn d2(self, p: f64) -> f64 {
        match self {
            Transform::Id => 0.0,
            Transform::Sin => -math::sin(p),
            Transform::Cos => -math::cos(p),
            Transform::Tanh => {
                let t = math::tanh(p);
                -2.0 * t * (1.0 - t * t)
            }
            Transform::Sqrt => -0.25 / (p * math::sqrt(p)),
            Transform::Log => -1.0 / (p * p),
            Transform::Log1p => -1.0 / ((1.0 + p) * (1.0 + p)),
            Transform::Exp => math::exp(p),
        }
    }

    pub fn image(self, p: Interval) -> Interval {
        self.unary().map_or(p, |f| p.unary(f))
    }

    pub fn d1_interval(self, p: Interval) -> Interval {
        if !p.is_defined() {
            return p;
        }
        match self {
            Transform::Id => Interval::ONE,
            Transform::Sin => p.unary(UnaryFn::Cos),
            Transform::Cos => -p.unary(UnaryFn::Sin),
            Transform::Tanh => Interval::ONE - p.unary(UnaryFn::Tanh).square(),
            Transform::Sqrt => Interval::point(0.5) / p.unary(UnaryFn::Sqrt),
            Transform::Log => p.recip(),
            Transform::Log1p => p.shift(1.0).recip(),
            Transform::Exp => p.unary(UnaryFn::Exp),
        }
    }

    pub fn d2_interval(self, p: Interval) -> Interval {
        if !p.is_defined() {
            return p;
        }
        match self {
            Transform::Id => Interval::ZERO,
            Transform::Sin => -p.unary(UnaryFn::Sin),
            Transform::Cos => -p.unary(UnaryFn::Cos),
            Transform::Tanh => {
                let t = p.unary(UnaryFn::Tanh);
                (t * (Interval::ONE - t.square())).scale(-2.0)
            }
            Transform::Sqrt => (p * p.unary(UnaryFn::Sqrt)).recip().scale(-0.25),
            Transform::Log => -p.pow_int(-2),
            Transform::Log1p => -p.shift(1.0).pow_int(-2),
            Transform::Exp => p.unary(UnaryFn::Exp),
        }
    }
}

/// One term: `transform(prod_j x_j ^ strengths[j])`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ItTerm {
    pub strengths: Vec<i32>,
    pub transform: Transform,
}

impl ItTerm {
    /// Rejects all-zero strength vectors.
    pub fn new(strengths: Vec<i32>, transform: Transform) -> Result<Self> {
        if strengths.iter().all(|&k| k == 0) {
            return Err(Error::InvalidTerm(
                "interaction has no non-zero strength".into(),
            ));
        }
        Ok(ItTerm {
            strengths,
            transform,
        })
    }

    pub fn dim(&self) -> usize {
        self.strengths.len()
    }

    /// Number of variables with non-zero strength.
    pub fn term_length(&self) -> usize {
        self.strengths.iter().filter(|&&k| k != 0).count()
    }

    fn monomial_with(strengths: &[i32], row: &[f64]) -> f64 {
        strengths
            .iter()
            .zip(row)
            .filter(|(k, _)| **k != 0)
            .map(|(&k, &x)| math::powi(x, k))
            .product()
    }

    fn monomial_interval_with(strengths: &[i32], domain: &Domain) -> Interval {
        strengths
            .iter()
            .enumerate()
            .filter(|(_, k)| **k != 0)
            .fold(Interval::ONE, |acc, (j, &k)| acc * domain.get(j).pow_int(k))
    }

    pub fn monomial(&self, row: &[f64]) -> f64 {
        Self::monomial_with(&self.strengths, row)
    }

    pub fn monomial_interval(&self, domain: &Domain) -> Interval {
        Self::monomial_interval_with(&self.strengths, domain)
    }

    pub fn eval_row(&self, row: &[f64]) -> f64 {
        self.transform.apply(self.monomial(row))
    }

    pub fn image(&self, domain: &Domain) -> Interval {
        self.transform.image(self.monomial_interval(domain))
    }

    // strengths with `by` subtracted at position j
    fn lowered(&self, j: usize, by: i32) -> Vec<i32> {
        let mut s = self.strengths.clone();
        s[j] -= by;
        s
    }

    /// `d^order / dx_j^order` of the term at a point (order 1 or 2).
    /// The monomial quotient `p(x) / x_j` is formed structurally by lowering
    /// the strength at `j`.
    pub fn derivative_row(&self, j: usize, order: u8, row: &[f64]) -> f64 {
        let k = self.strengths[j];
        if k == 0 {
            return 0.0;
        }
        let p = self.monomial(row);
        let kf = k as f64;
        let dp = kf * Self::monomial_with(&self.lowered(j, 1), row);
        match order {
            1 => self.transform.d1(p) * dp,
            _ if k == 1 => self.transform.d2(p) * dp * dp,
            _ => {
                let ddp = kf * (kf - 1.0) * Self::monomial_with(&self.lowered(j, 2), row);
                self.transform.d2(p) * dp * dp + self.transform.d1(p) * ddp
            }
        }
    }

    pub fn derivative_interval(&self, j: usize, order: u8, domain: &Domain) -> Interval {
        let k = self.strengths[j];
        if k == 0 {
            return Interval::ZERO;
        }
        let p = self.monomial_interval(domain);
        let kf = k as f64;
        let dp = Self::monomial_interval_with(&self.lowered(j, 1), domain).scale(kf);
        match order {
            1 => self.transform.d1_interval(p) * dp,
            _ => {
                let curvature = self.transform.d2_interval(p) * dp.square();
                if k == 1 {
                    return curvature;
                }
                let ddp = Self::monomial_interval_with(&self.lowered(j, 2), domain)
                    .scale(kf * (kf - 1.0));
                curvature + self.transform.d1_interval(p) * ddp
            }
        }
    }
}

impl fmt::Display for ItTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.transform.name())?;
        let mut first = true;
        for (j, &k) in self.strengths.iter().enumerate() {
            if k == 0 {
                continue;
            }
            if !first {
                f.write_str(" * ")?;
            }
            first = false;
            if k == 1 {
                write!(f, "x{j}")?;
            } else {
                write!(f, "x{j}^{k}")?;
            }
        }
        f.write_str(")")
    }
}

/// `intercept + sum_i weights[i] * term_i(x)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ItExpression {
    pub terms: Vec<ItTerm>,
    pub weights: Vec<f64>,
    pub intercept: f64,
}

impl ItExpression {
    pub fn new(terms: Vec<ItTerm>, weights: Vec<f64>, intercept: f64) -> Result<Self> {
        if terms.len() != weights.len() {
            return Err(Error::DimensionMismatch {
                expected: terms.len(),
                found: weights.len(),
            });
        }
        if let Some(d) = terms.first().map(ItTerm::dim) {
            if let Some(bad) = terms.iter().find(|t| t.dim() != d) {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: bad.dim(),
                });
            }
        }
        if let Some(t) = terms.iter().find(|t| t.term_length() == 0) {
            return Err(Error::InvalidTerm(alloc::format!(
                "empty interaction in {t}"
            )));
        }
        Ok(ItExpression {
            terms,
            weights,
            intercept,
        })
    }

    pub fn dim(&self) -> usize {
        self.terms.first().map_or(0, ItTerm::dim)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval_row(&self, row: &[f64]) -> f64 {
        self.intercept
            + self
                .terms
                .iter()
                .zip(&self.weights)
                .map(|(t, w)| w * t.eval_row(row))
                .sum::<f64>()
    }

    pub fn eval(&self, x: &Matrix) -> Vec<f64> {
        x.iter_rows().map(|r| self.eval_row(r)).collect()
    }

    /// Enclosure of the output: weighted sum of the term images.
    pub fn image(&self, domain: &Domain) -> Interval {
        self.terms
            .iter()
            .zip(&self.weights)
            .fold(Interval::point(self.intercept), |acc, (t, &w)| {
                acc + t.image(domain).scale(w)
            })
    }

    pub fn derivative_row(&self, var: usize, order: u8, row: &[f64]) -> f64 {
        self.terms
            .iter()
            .zip(&self.weights)
            .map(|(t, &w)| {
                let d = t.derivative_row(var, order, row);
                math::mul_ext(w, d)
            })
            .sum()
    }

    /// Enclosure of a partial derivative via the chain rule.
    pub fn derivative_interval(&self, var: usize, order: u8, domain: &Domain) -> Interval {
        self.terms
            .iter()
            .zip(&self.weights)
            .fold(Interval::ZERO, |acc, (t, &w)| {
                acc + t.derivative_interval(var, order, domain).scale(w)
            })
    }
}

impl fmt::Display for ItExpression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.intercept)?;
        for (t, w) in self.terms.iter().zip(&self.weights) {
            write!(f, " + {w:?} * {t}")?;
        }
        Ok(())
    }
}

impl Model for ItExpression {
    fn predict(&self, x: &Matrix) -> Vec<f64> {
        self.eval(x)
    }
}

impl ShapeModel for ItExpression {
    fn bound(&self, op: ConstraintOp, domain: &Domain) -> Interval {
        match op {
            ConstraintOp::Image => self.image(domain),
            ConstraintOp::Derivative { var, order } => self.derivative_interval(var, order, domain),
        }
    }

    fn pointwise(&self, op: ConstraintOp) -> Box<dyn Fn(&[f64]) -> f64 + '_> {
        match op {
            ConstraintOp::Image => Box::new(move |row| self.eval_row(row)),
            ConstraintOp::Derivative { var, order } => {
                Box::new(move |row| self.derivative_row(var, order, row))
            }
        }
    }
}
