//! NMSE with implicit linear scaling and the constraint-aware evaluation.

use alloc::boxed::Box;
use alloc::vec::Vec;

use crate::constraints::{check_pessimistic, ConstraintOp, ConstraintSet, ShapeModel};
use crate::data::Matrix;
use crate::interval::{Domain, Interval};
use crate::stats;

/// Variance of predictions below which the model is treated as constant.
pub const DEGENERATE_VARIANCE: f64 = 1e-12;

/// Anything that can predict a target vector from an input matrix.
pub trait Model {
    fn predict(&self, x: &Matrix) -> Vec<f64>;
}

impl<M: Model + ?Sized> Model for &M {
    fn predict(&self, x: &Matrix) -> Vec<f64> {
        (**self).predict(x)
    }
}

/// `offset + scale * f(x)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Scaling {
    pub offset: f64,
    pub scale: f64,
}

impl Scaling {
    pub const IDENTITY: Scaling = Scaling {
        offset: 0.0,
        scale: 1.0,
    };

    pub fn apply(&self, v: f64) -> f64 {
        self.offset + self.scale * v
    }
}

/// Least-squares affine fit of `pred` to `y`. Returns `None` when any
/// prediction is non-finite.
pub fn linear_scaling(pred: &[f64], y: &[f64]) -> Option<Scaling> {
    if pred.iter().any(|p| !p.is_finite()) {
        return None;
    }
    let mp = stats::mean(pred);
    let my = stats::mean(y);
    let (mut cov, mut var) = (0.0, 0.0);
    for (p, t) in pred.iter().zip(y) {
        cov += (p - mp) * (t - my);
        var += (p - mp) * (p - mp);
    }
    let n = pred.len() as f64;
    let (cov, var) = (cov / n, var / n);
    if !(var >= DEGENERATE_VARIANCE) || !var.is_finite() {
        return Some(Scaling {
            offset: my,
            scale: 0.0,
        });
    }
    let scale = cov / var;
    Some(Scaling {
        offset: my - scale * mp,
        scale,
    })
}

/// `min(||pred - y||^2 / ||y - mean(y)||^2, 1)`; 1 if anything is NaN.
pub fn nmse(pred: &[f64], y: &[f64]) -> f64 {
    let my = stats::mean(y);
    let norm: f64 = y.iter().map(|t| (t - my) * (t - my)).sum();
    let err = stats::sse(pred, y);
    let v = err / norm;
    if v.is_nan() {
        1.0
    } else {
        v.min(1.0)
    }
}

/// A model with a linear scaling applied to its output.
#[derive(Clone, Debug, PartialEq)]
pub struct ScaledModel<M> {
    pub inner: M,
    pub scaling: Scaling,
}

impl<M> ScaledModel<M> {
    pub fn new(inner: M, scaling: Scaling) -> Self {
        ScaledModel { inner, scaling }
    }

    pub fn unscaled(inner: M) -> Self {
        ScaledModel {
            inner,
            scaling: Scaling::IDENTITY,
        }
    }
}

impl<M: Model> ScaledModel<M> {
    /// Fits the scaling on `(x, y)`; `None` if the inner predictions are not finite.
    pub fn fit(inner: M, x: &Matrix, y: &[f64]) -> Option<Self> {
        let pred = inner.predict(x);
        linear_scaling(&pred, y).map(|s| ScaledModel::new(inner, s))
    }
}

impl<M: Model> Model for ScaledModel<M> {
    fn predict(&self, x: &Matrix) -> Vec<f64> {
        let mut p = self.inner.predict(x);
        p.iter_mut().for_each(|v| *v = self.scaling.apply(*v));
        p
    }
}

impl<M: ShapeModel> ShapeModel for ScaledModel<M> {
    fn bound(&self, op: ConstraintOp, domain: &Domain) -> Interval {
        let inner = self.inner.bound(op, domain);
        match op {
            ConstraintOp::Image => inner.scale(self.scaling.scale).shift(self.scaling.offset),
            ConstraintOp::Derivative { .. } => inner.scale(self.scaling.scale),
        }
    }

    fn pointwise(&self, op: ConstraintOp) -> Box<dyn Fn(&[f64]) -> f64 + '_> {
        let f = self.inner.pointwise(op);
        let s = self.scaling;
        match op {
            ConstraintOp::Image => Box::new(move |row| s.apply(f(row))),
            ConstraintOp::Derivative { .. } => Box::new(move |row| s.scale * f(row)),
        }
    }
}

/// Result of [`evaluate`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Evaluation {
    /// NMSE in `[0, 1]`; exactly 1 for infeasible or non-finite candidates.
    pub nmse: f64,
    /// Fitted scaling, if the candidate was feasible and finite.
    pub scaling: Option<Scaling>,
}

impl Evaluation {
    pub const WORST: Evaluation = Evaluation {
        nmse: 1.0,
        scaling: None,
    };
}

/// Linear-scales the model on the training data, checks the constraints on
/// the scaled model, and returns the NMSE of the scaled predictions (or 1 if
/// infeasible).
pub fn evaluate<M: Model + ShapeModel>(
    model: &M,
    x: &Matrix,
    y: &[f64],
    constraints: &ConstraintSet,
) -> Evaluation {
    let pred = model.predict(x);
    let Some(scaling) = linear_scaling(&pred, y) else {
        return Evaluation::WORST;
    };
    if !constraints.is_empty() {
        let scaled = ScaledModel::new(model, scaling);
        if !check_pessimistic(&scaled, constraints).is_feasible() {
            return Evaluation::WORST;
        }
    }
    let scaled: Vec<f64> = pred.iter().map(|p| scaling.apply(*p)).collect();
    Evaluation {
        nmse: nmse(&scaled, y),
        scaling: Some(scaling),
    }
}
