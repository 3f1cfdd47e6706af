//! Interval arithmetic over the extended reals.
//!
//! Every primitive used by the tree and IT representations has an interval
//! counterpart that returns a guaranteed enclosure of the pointwise image.
//! Domain violations (division by an interval containing zero, `log` of a
//! non-positive range, ...) produce an *undefined* interval instead of an
//! unbounded one; undefinedness is absorbing.
//!
//! Infinite endpoints stand for possible overflow. Operations whose IEEE
//! pointwise counterpart can turn an overflow into NaN (`inf - inf`,
//! `0 * inf`, `sin(inf)`) are undefined when an operand is unbounded.
//!
//! Endpoints are computed in ordinary double precision, without directed
//! rounding.

use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Div, Mul, Neg, Sub};

use crate::math;
use crate::{Error, Result};

#[derive(Clone, Copy, PartialEq)]
pub struct Interval {
    lo: f64,
    hi: f64,
    defined: bool,
}

impl Interval {
    pub const UNDEFINED: Interval = Interval {
        lo: f64::NAN,
        hi: f64::NAN,
        defined: false,
    };
    pub const ENTIRE: Interval = Interval {
        lo: f64::NEG_INFINITY,
        hi: f64::INFINITY,
        defined: true,
    };
    pub const ZERO: Interval = Interval {
        lo: 0.0,
        hi: 0.0,
        defined: true,
    };
    pub const ONE: Interval = Interval {
        lo: 1.0,
        hi: 1.0,
        defined: true,
    };

    /// Builds `[lo, hi]`. NaN endpoints or `lo > hi` yield an undefined interval.
    pub fn new(lo: f64, hi: f64) -> Self {
        if lo.is_nan() || hi.is_nan() || lo > hi {
            Self::UNDEFINED
        } else {
            Interval {
                lo,
                hi,
                defined: true,
            }
        }
    }

    pub fn point(v: f64) -> Self {
        Self::new(v, v)
    }

    fn hull(a: f64, b: f64) -> Self {
        if a <= b {
            Self::new(a, b)
        } else {
            Self::new(b, a)
        }
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn is_defined(&self) -> bool {
        self.defined
    }

    pub fn is_finite(&self) -> bool {
        self.defined && self.lo.is_finite() && self.hi.is_finite()
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        self.defined && self.lo <= x && x <= self.hi
    }

    pub fn contains_zero(&self) -> bool {
        self.contains(0.0)
    }

    /// Containment with a relative outward slack on both endpoints.
    pub fn contains_with_slack(&self, x: f64, rel: f64) -> bool {
        if !self.defined || x.is_nan() {
            return false;
        }
        let scale = |v: f64| {
            if v.is_finite() {
                math::abs(v).max(1.0)
            } else {
                1.0
            }
        };
        let lo = self.lo - rel * scale(self.lo).max(scale(x));
        let hi = self.hi + rel * scale(self.hi).max(scale(x));
        lo <= x && x <= hi
    }

    pub fn is_subset_of(&self, other: &Interval) -> bool {
        self.defined && other.defined && other.lo <= self.lo && self.hi <= other.hi
    }

    fn map2(self, other: Interval, f: impl FnOnce(Interval, Interval) -> Interval) -> Interval {
        if self.defined && other.defined {
            f(self, other)
        } else {
            Self::UNDEFINED
        }
    }

    pub fn is_unbounded(&self) -> bool {
        self.defined && !(self.lo.is_finite() && self.hi.is_finite())
    }

    /// Undefined when opposite infinities can meet.
    pub fn add(self, other: Interval) -> Interval {
        self.map2(other, |a, b| {
            if (a.hi == f64::INFINITY && b.lo == f64::NEG_INFINITY)
                || (a.lo == f64::NEG_INFINITY && b.hi == f64::INFINITY)
            {
                return Self::UNDEFINED;
            }
            Interval::new(a.lo + b.lo, a.hi + b.hi)
        })
    }

    pub fn sub(self, other: Interval) -> Interval {
        self.add(other.neg())
    }

    pub fn neg(self) -> Interval {
        if self.defined {
            Interval::new(-self.hi, -self.lo)
        } else {
            self
        }
    }

    /// Undefined when one factor contains zero and the other is unbounded.
    pub fn mul(self, other: Interval) -> Interval {
        self.map2(other, |a, b| {
            if (a.contains_zero() && b.is_unbounded()) || (b.contains_zero() && a.is_unbounded()) {
                return Self::UNDEFINED;
            }
            let p = [a.lo * b.lo, a.lo * b.hi, a.hi * b.lo, a.hi * b.hi];
            let lo = p.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = p.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            Interval::new(lo, hi)
        })
    }

    /// `1 / self`; undefined when the interval contains zero.
    pub fn recip(self) -> Interval {
        if !self.defined || self.contains_zero() {
            return Self::UNDEFINED;
        }
        Interval::new(1.0 / self.hi, 1.0 / self.lo)
    }

    /// Division; undefined whenever the divisor contains zero.
    pub fn div(self, other: Interval) -> Interval {
        self.mul(other.recip())
    }

    pub fn scale(self, k: f64) -> Interval {
        self.mul(Interval::point(k))
    }

    pub fn shift(self, k: f64) -> Interval {
        self.add(Interval::point(k))
    }

    pub fn square(self) -> Interval {
        if !self.defined {
            return self;
        }
        let (l2, h2) = (self.lo * self.lo, self.hi * self.hi);
        if self.lo >= 0.0 {
            Interval::new(l2, h2)
        } else if self.hi <= 0.0 {
            Interval::new(h2, l2)
        } else {
            Interval::new(0.0, l2.max(h2))
        }
    }

    /// Image of `x^k` for integer `k`; undefined for `k < 0` when the
    /// interval contains zero.
    pub fn pow_int(self, k: i32) -> Interval {
        if !self.defined {
            return self;
        }
        if k == 0 {
            return Self::ONE;
        }
        if k < 0 {
            if self.contains_zero() {
                return Self::UNDEFINED;
            }
            return self.pow_int(-k).recip();
        }
        let (pl, ph) = (math::powi(self.lo, k), math::powi(self.hi, k));
        if k % 2 == 1 || self.lo >= 0.0 {
            Interval::hull(pl, ph)
        } else if self.hi <= 0.0 {
            Interval::new(ph, pl)
        } else {
            Interval::new(0.0, pl.max(ph))
        }
    }

    fn monotone(self, f: impl Fn(f64) -> f64) -> Interval {
        Interval::new(f(self.lo), f(self.hi))
    }

    fn sin_image(self) -> Interval {
        if !self.is_finite() {
            return Self::UNDEFINED;
        }
        if self.width() >= math::TAU {
            return Interval::new(-1.0, 1.0);
        }
        let (a, b) = (math::sin(self.lo), math::sin(self.hi));
        let mut lo = a.min(b);
        let mut hi = a.max(b);
        // maxima at pi/2 + 2k pi, minima at -pi/2 + 2k pi
        if spans_point(self.lo, self.hi, math::PI / 2.0) {
            hi = 1.0;
        }
        if spans_point(self.lo, self.hi, -math::PI / 2.0) {
            lo = -1.0;
        }
        Interval::new(lo, hi)
    }

    fn cos_image(self) -> Interval {
        if !self.is_finite() {
            return Self::UNDEFINED;
        }
        if self.width() >= math::TAU {
            return Interval::new(-1.0, 1.0);
        }
        let (a, b) = (math::cos(self.lo), math::cos(self.hi));
        let mut lo = a.min(b);
        let mut hi = a.max(b);
        if spans_point(self.lo, self.hi, 0.0) {
            hi = 1.0;
        }
        if spans_point(self.lo, self.hi, math::PI) {
            lo = -1.0;
        }
        Interval::new(lo, hi)
    }

    /// Image of a univariate primitive.
    pub fn unary(self, f: UnaryFn) -> Interval {
        if !self.defined {
            return self;
        }
        match f {
            UnaryFn::Exp => self.monotone(math::exp),
            UnaryFn::Tanh => self.monotone(math::tanh),
            UnaryFn::Log if self.lo <= 0.0 => Self::UNDEFINED,
            UnaryFn::Log => self.monotone(math::ln),
            UnaryFn::Log1p if self.lo <= -1.0 => Self::UNDEFINED,
            UnaryFn::Log1p => self.monotone(math::ln_1p),
            UnaryFn::Sqrt if self.lo < 0.0 => Self::UNDEFINED,
            UnaryFn::Sqrt => self.monotone(math::sqrt),
            UnaryFn::Sin => self.sin_image(),
            UnaryFn::Cos => self.cos_image(),
            UnaryFn::Square => self.square(),
        }
    }

    /// Image of `asin`; undefined unless the interval lies inside `[-1, 1]`.
    pub fn asin(self) -> Interval {
        if !self.defined || self.lo < -1.0 || self.hi > 1.0 {
            return Self::UNDEFINED;
        }
        self.monotone(math::asin)
    }
}

/// Whether `[lo, hi]` contains `phase + 2 k pi` for some integer `k`.
fn spans_point(lo: f64, hi: f64, phase: f64) -> bool {
    let k = math::ceil((lo - phase) / math::TAU);
    phase + k * math::TAU <= hi
}

impl fmt::Debug for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.defined {
            write!(f, "[{:?}, {:?}]", self.lo, self.hi)
        } else {
            f.write_str("[undefined]")
        }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl From<[f64; 2]> for Interval {
    fn from(v: [f64; 2]) -> Self {
        Interval::new(v[0], v[1])
    }
}

impl Add for Interval {
    type Output = Interval;
    fn add(self, rhs: Interval) -> Interval {
        Interval::add(self, rhs)
    }
}

impl Sub for Interval {
    type Output = Interval;
    fn sub(self, rhs: Interval) -> Interval {
        Interval::sub(self, rhs)
    }
}

impl Mul for Interval {
    type Output = Interval;
    fn mul(self, rhs: Interval) -> Interval {
        Interval::mul(self, rhs)
    }
}

impl Div for Interval {
    type Output = Interval;
    fn div(self, rhs: Interval) -> Interval {
        Interval::div(self, rhs)
    }
}

impl Neg for Interval {
    type Output = Interval;
    fn neg(self) -> Interval {
        Interval::neg(self)
    }
}

/// Univariate primitives: the union of the GP and IT function sets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum UnaryFn {
    Log,
    Exp,
    Sin,
    Cos,
    Tanh,
    Square,
    Sqrt,
    Log1p,
}

impl UnaryFn {
    pub const ALL: [UnaryFn; 8] = [
        UnaryFn::Log,
        UnaryFn::Exp,
        UnaryFn::Sin,
        UnaryFn::Cos,
        UnaryFn::Tanh,
        UnaryFn::Square,
        UnaryFn::Sqrt,
        UnaryFn::Log1p,
    ];

    pub fn apply(self, x: f64) -> f64 {
        match self {
            UnaryFn::Log => math::ln(x),
            UnaryFn::Exp => math::exp(x),
            UnaryFn::Sin => math::sin(x),
            UnaryFn::Cos => math::cos(x),
            UnaryFn::Tanh => math::tanh(x),
            UnaryFn::Square => x * x,
            UnaryFn::Sqrt => math::sqrt(x),
            UnaryFn::Log1p => math::ln_1p(x),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            UnaryFn::Log => "log",
            UnaryFn::Exp => "exp",
            UnaryFn::Sin => "sin",
            UnaryFn::Cos => "cos",
            UnaryFn::Tanh => "tanh",
            UnaryFn::Square => "square",
            UnaryFn::Sqrt => "sqrt",
            UnaryFn::Log1p => "log1p",
        }
    }

    pub fn from_name(name: &str) -> Option<UnaryFn> {
        UnaryFn::ALL.into_iter().find(|f| f.name() == name)
    }
}

/// Axis-aligned box: one finite interval per input variable.
#[derive(Clone, Debug, PartialEq)]
pub struct Domain {
    bounds: Vec<Interval>,
}

impl Domain {
    pub fn new(bounds: Vec<Interval>) -> Result<Self> {
        for (i, b) in bounds.iter().enumerate() {
            if !b.is_finite() {
                return Err(Error::InvalidDomain(alloc::format!(
                    "component {i} is not a finite interval: {b:?}"
                )));
            }
        }
        Ok(Domain { bounds })
    }

    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        Self::new(
            pairs
                .iter()
                .map(|&(lo, hi)| Interval::new(lo, hi))
                .collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn bounds(&self) -> &[Interval] {
        &self.bounds
    }

    pub fn get(&self, i: usize) -> Interval {
        self.bounds[i]
    }

    /// Uniform sample from the box.
    pub fn sample<R: rand::Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        for (slot, b) in out.iter_mut().zip(&self.bounds) {
            *slot = if b.lo() == b.hi() {
                b.lo()
            } else {
                b.lo() + rng.random::<f64>() * (b.hi() - b.lo())
            };
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim() && self.bounds.iter().zip(x).all(|(b, &v)| b.contains(v))
    }
}
