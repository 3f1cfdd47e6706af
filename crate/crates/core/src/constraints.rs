//! Shape constraints and their pessimistic (interval) and empirical checks.
//!
//! A constraint encodes `sign * Op(f)(x) - threshold <= 0` for every `x` in
//! the box, where `Op` is either the model output or a partial derivative.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

use crate::interval::{Domain, Interval};
use crate::{Error, Result};

/// Absolute tolerance used by the empirical audit.
pub const AUDIT_TOLERANCE: f64 = 1e-9;

/// Default number of audit samples.
pub const DEFAULT_AUDIT_SAMPLES: usize = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ConstraintOp {
    Image,
    Derivative { var: usize, order: u8 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sign {
    Pos,
    Neg,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Pos => 1.0,
            Sign::Neg => -1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShapeConstraint {
    pub op: ConstraintOp,
    pub sign: Sign,
    pub threshold: f64,
}

impl ShapeConstraint {
    /// `df/dx_var >= 0`.
    pub fn non_decreasing(var: usize) -> Self {
        ShapeConstraint {
            op: ConstraintOp::Derivative { var, order: 1 },
            sign: Sign::Neg,
            threshold: 0.0,
        }
    }

    /// `df/dx_var <= 0`.
    pub fn non_increasing(var: usize) -> Self {
        ShapeConstraint {
            op: ConstraintOp::Derivative { var, order: 1 },
            sign: Sign::Pos,
            threshold: 0.0,
        }
    }

    /// `f <= hi`.
    pub fn upper_bound(hi: f64) -> Self {
        ShapeConstraint {
            op: ConstraintOp::Image,
            sign: Sign::Pos,
            threshold: hi,
        }
    }

    /// `f >= lo`, encoded as `-f <= -lo`.
    pub fn lower_bound(lo: f64) -> Self {
        ShapeConstraint {
            op: ConstraintOp::Image,
            sign: Sign::Neg,
            threshold: -lo,
        }
    }

    /// Violation from an enclosure of `Op(f)`: `max(0, sup(s * I) - c)`,
    /// infinite when the enclosure is undefined.
    pub fn violation(&self, bound: Interval) -> f64 {
        if !bound.is_defined() {
            return f64::INFINITY;
        }
        let signed = match self.sign {
            Sign::Pos => bound,
            Sign::Neg => -bound,
        };
        let v = signed.hi() - self.threshold;
        if v.is_nan() {
            f64::INFINITY
        } else {
            v.max(0.0)
        }
    }

    /// Whether a pointwise value violates the constraint beyond the audit tolerance.
    pub fn violated_at(&self, value: f64) -> bool {
        let v = self.sign.value() * value - self.threshold;
        !(v <= AUDIT_TOLERANCE)
    }
}

impl core::fmt::Display for ShapeConstraint {
    /// `d/dx0 f >= 0`, `d2/dx1^2 f <= 0`, `f <= 3`.
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self.op {
            ConstraintOp::Image => write!(f, "f")?,
            ConstraintOp::Derivative { var, order: 1 } => write!(f, "d/dx{var} f")?,
            ConstraintOp::Derivative { var, order } => write!(f, "d{order}/dx{var}^{order} f")?,
        }
        match self.sign {
            Sign::Pos => write!(f, " <= {}", self.threshold),
            Sign::Neg => write!(f, " >= {}", 0.0 - self.threshold),
        }
    }
}

/// Models whose output and partial derivatives can be bounded over a box and
/// evaluated pointwise.
pub trait ShapeModel {
    fn bound(&self, op: ConstraintOp, domain: &Domain) -> Interval;

    /// Pointwise evaluator for `Op(f)`; any preparation (e.g. symbolic
    /// differentiation) happens once, here.
    fn pointwise(&self, op: ConstraintOp) -> Box<dyn Fn(&[f64]) -> f64 + '_>;
}

impl<M: ShapeModel + ?Sized> ShapeModel for &M {
    fn bound(&self, op: ConstraintOp, domain: &Domain) -> Interval {
        (**self).bound(op, domain)
    }

    fn pointwise(&self, op: ConstraintOp) -> Box<dyn Fn(&[f64]) -> f64 + '_> {
        (**self).pointwise(op)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConstraintSet {
    constraints: Vec<ShapeConstraint>,
    domain: Domain,
}

impl ConstraintSet {
    pub fn new(constraints: Vec<ShapeConstraint>, domain: Domain) -> Result<Self> {
        for c in &constraints {
            if let ConstraintOp::Derivative { var, order } = c.op {
                if var >= domain.dim() {
                    return Err(Error::DimensionMismatch {
                        expected: domain.dim(),
                        found: var + 1,
                    });
                }
                if !(1..=2).contains(&order) {
                    return Err(Error::InvalidDomain(alloc::format!(
                        "derivative order {order} not in {{1, 2}}"
                    )));
                }
            }
        }
        Ok(ConstraintSet {
            constraints,
            domain,
        })
    }

    /// No constraints over `domain`.
    pub fn unconstrained(domain: Domain) -> Self {
        ConstraintSet {
            constraints: Vec::new(),
            domain,
        }
    }

    /// Builds constraints from a monotonicity tuple (`+1` non-decreasing,
    /// `-1` non-increasing, `0` free) and optional output bounds.
    pub fn from_monotonicity(
        tuple: &[i8],
        domain: Domain,
        image_bounds: Option<(f64, f64)>,
    ) -> Result<Self> {
        if tuple.len() != domain.dim() {
            return Err(Error::DimensionMismatch {
                expected: domain.dim(),
                found: tuple.len(),
            });
        }
        let mut constraints = Vec::new();
        for (i, &t) in tuple.iter().enumerate() {
            match t {
                1 => constraints.push(ShapeConstraint::non_decreasing(i)),
                -1 => constraints.push(ShapeConstraint::non_increasing(i)),
                0 => {}
                other => {
                    return Err(Error::InvalidDomain(alloc::format!(
                        "monotonicity code {other} not in {{-1, 0, 1}}"
                    )))
                }
            }
        }
        if let Some((lo, hi)) = image_bounds {
            constraints.push(ShapeConstraint::upper_bound(hi));
            constraints.push(ShapeConstraint::lower_bound(lo));
        }
        Ok(ConstraintSet {
            constraints,
            domain,
        })
    }

    pub fn constraints(&self) -> &[ShapeConstraint] {
        &self.constraints
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty()
    }

    pub fn len(&self) -> usize {
        self.constraints.len()
    }

    pub fn push(&mut self, c: ShapeConstraint) {
        self.constraints.push(c);
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Feasibility {
    Feasible,
    Violated(f64),
}

impl Feasibility {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Feasibility::Feasible)
    }

    /// Total violation; zero when feasible.
    pub fn total(&self) -> f64 {
        match self {
            Feasibility::Feasible => 0.0,
            Feasibility::Violated(v) => *v,
        }
    }
}

/// Interval-based check over the whole box. Sound: a feasible verdict means
/// no point of the box violates any constraint.
///
/// With at least one constraint, a model whose own output enclosure is
/// undefined (partial function on the box) is rejected with infinite
/// violation as well.
pub fn check_pessimistic<M: ShapeModel + ?Sized>(model: &M, set: &ConstraintSet) -> Feasibility {
    if set.is_empty() {
        return Feasibility::Feasible;
    }
    let mut total = 0.0;
    let mut image_checked = false;
    for c in &set.constraints {
        let bound = model.bound(c.op, &set.domain);
        image_checked |= c.op == ConstraintOp::Image;
        total += c.violation(bound);
    }
    if !image_checked && !model.bound(ConstraintOp::Image, &set.domain).is_defined() {
        total = f64::INFINITY;
    }
    if total > 0.0 {
        Feasibility::Violated(total)
    } else {
        Feasibility::Feasible
    }
}

/// Per-constraint counts of violated sample points.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AuditReport {
    pub samples: usize,
    pub violations: Vec<usize>,
}

impl AuditReport {
    pub fn is_feasible(&self) -> bool {
        self.violations.iter().all(|&v| v == 0)
    }

    pub fn total_violations(&self) -> usize {
        self.violations.iter().sum()
    }

    /// Associative merge of two partial reports over the same constraint set.
    pub fn merge(mut self, other: &AuditReport) -> AuditReport {
        self.samples += other.samples;
        for (a, b) in self.violations.iter_mut().zip(&other.violations) {
            *a += b;
        }
        self
    }
}

/// Samples the box uniformly and counts, per constraint, the points where the
/// model or its derivative violates the constraint by more than
/// [`AUDIT_TOLERANCE`]. Non-finite pointwise values count as violations.
pub fn audit_empirical<M: ShapeModel + ?Sized, R: rand::Rng + ?Sized>(
    model: &M,
    set: &ConstraintSet,
    n_samples: usize,
    rng: &mut R,
) -> AuditReport {
    let evaluators: Vec<_> = set
        .constraints
        .iter()
        .map(|c| model.pointwise(c.op))
        .collect();
    let mut violations = vec![0usize; set.len()];
    let mut x = vec![0.0; set.domain.dim()];
    for _ in 0..n_samples {
        set.domain.sample(rng, &mut x);
        for ((c, f), count) in set.constraints.iter().zip(&evaluators).zip(&mut violations) {
            if c.violated_at(f(&x)) {
                *count += 1;
            }
        }
    }
    AuditReport {
        samples: n_samples,
        violations,
    }
}
